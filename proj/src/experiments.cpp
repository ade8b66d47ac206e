#include "coupled_rwm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace crwm {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

KernelSpec kernel_for(const Cell &cell, double ell) {
  return standard_kernel(cell.dim, cell.proposal.kind, cell.acceptance, ell,
                         cell.proposal.hybrid_cutoff);
}

} // namespace

std::string ProposalChoice::label() const {
  if (kind == ProposalKind::Hybrid)
    return "hybrid:" + shortest(hybrid_cutoff);
  return std::string(to_string(kind));
}

void validate(const ExperimentSpec &spec) {
  if (spec.dims.empty())
    throw DomainError("at least one dimension is required");
  for (auto d : spec.dims)
    if (d < 1)
      throw DomainError("dimensions must be positive");
  if (spec.proposals.empty() || spec.acceptances.empty())
    throw DomainError("at least one proposal and acceptance coupling needed");
  if (spec.replications < 1)
    throw DomainError("replications must be at least 1");
  if (spec.t_max < 1)
    throw DomainError("t_max must be positive");
  if (!(spec.ell > 0.0))
    throw DomainError("ell must be positive");
  for (const auto &p : spec.proposals)
    if (p.kind == ProposalKind::Hybrid && !(p.hybrid_cutoff > 0.0))
      throw DomainError("hybrid cutoff must be positive");
  if (spec.protocol == Protocol::Trace && spec.horizon < 1)
    throw DomainError("trace horizon must be positive");
  if (spec.protocol == Protocol::Drift) {
    if (spec.r_grid.empty())
      throw DomainError("drift needs a nonempty r grid");
    for (double r : spec.r_grid)
      if (!(r > 0.0))
        throw DomainError("drift separations must be positive");
  }
}

std::vector<Cell> expand_cells(const ExperimentSpec &spec) {
  std::vector<Cell> cells;
  for (auto d : spec.dims)
    for (const auto &p : spec.proposals)
      for (auto a : spec.acceptances)
        cells.push_back({d, p, a});
  return cells;
}

std::uint64_t replication_seed(std::uint64_t base_seed, const Cell &cell,
                               Integer replication) {
  const double cutoff = cell.proposal.kind == ProposalKind::Hybrid
                            ? cell.proposal.hybrid_cutoff
                            : 0.0;
  return derive_seed({base_seed, static_cast<std::uint64_t>(cell.dim),
                      static_cast<std::uint64_t>(cell.proposal.kind),
                      std::bit_cast<std::uint64_t>(cutoff),
                      static_cast<std::uint64_t>(cell.acceptance),
                      static_cast<std::uint64_t>(replication)});
}

void parallel_for(Integer n, unsigned threads,
                  const std::function<void(Integer)> &body) {
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  const auto workers =
      static_cast<unsigned>(std::min<Integer>(threads, std::max<Integer>(n, 1)));
  if (workers <= 1) {
    for (Integer i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::atomic<Integer> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (Integer i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back(work);
  for (auto &t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
}

ExperimentResult run_meet_sweep(const ExperimentSpec &spec) {
  validate(spec);
  const auto cells = expand_cells(spec);
  std::vector<KernelSpec> kernels;
  for (const auto &c : cells)
    kernels.push_back(kernel_for(c, spec.ell));

  ExperimentResult result;
  result.protocol = Protocol::Meet;
  const Integer reps = spec.replications;
  result.meet.resize(cells.size() * reps);

  parallel_for(static_cast<Integer>(result.meet.size()), spec.threads,
               [&](Integer slot) {
                 const auto ci = static_cast<std::size_t>(slot / reps);
                 const Integer rep = slot % reps;
                 const Cell &cell = cells[ci];
                 MeetRecord rec;
                 rec.cell = cell;
                 rec.replication = rep;
                 rec.seed = replication_seed(spec.base_seed, cell, rep);
                 Rng rng(rec.seed);
                 const Point x0 = rng.normal(cell.dim, 1.0);
                 const Point y0 = rng.normal(cell.dim, 1.0);
                 const auto run =
                     run_to_meeting(x0, y0, kernels[ci], spec.t_max, rng);
                 rec.censored = run.censored();
                 rec.tau = run.censored() ? spec.t_max : *run.tau;
                 result.meet[slot] = std::move(rec);
               });
  return result;
}

ExperimentResult run_trace(const ExperimentSpec &spec) {
  validate(spec);
  const auto cells = expand_cells(spec);
  const Integer reps = spec.replications;
  const Integer horizon = spec.horizon;

  ExperimentResult result;
  result.protocol = Protocol::Trace;

  for (const auto &cell : cells) {
    const auto kernel = kernel_for(cell, spec.ell);
    // One row of distances per replication, filled independently.
    std::vector<std::vector<double>> dist(reps);
    std::vector<Integer> met_at(reps, horizon + 1);
    parallel_for(reps, spec.threads, [&](Integer rep) {
      Rng rng(replication_seed(spec.base_seed, cell, rep));
      CoupledState state{rng.normal(cell.dim, 1.0), rng.normal(cell.dim, 1.0),
                         false, 0};
      state.met = bitwise_equal(state.x, state.y);
      auto &row = dist[rep];
      row.reserve(horizon + 1);
      row.push_back((state.y - state.x).norm());
      if (state.met)
        met_at[rep] = 0;
      for (Integer t = 1; t <= horizon; ++t) {
        const bool was_met = state.met;
        state = coupled_step(state, kernel, rng);
        row.push_back((state.y - state.x).norm());
        if (state.met && !was_met)
          met_at[rep] = t;
      }
    });

    TraceSeries series;
    series.cell = cell;
    for (Integer t = 0; t <= horizon; ++t) {
      double sum = 0.0;
      Integer alive = 0;
      for (Integer rep = 0; rep < reps; ++rep) {
        sum += dist[rep][t];
        if (met_at[rep] > t)
          ++alive;
      }
      series.points.push_back({t, sum / static_cast<double>(reps), alive});
    }
    result.trace.push_back(std::move(series));
  }
  return result;
}

ExperimentResult run_drift(const ExperimentSpec &spec) {
  validate(spec);
  const auto cells = expand_cells(spec);
  const Integer reps = spec.replications;

  ExperimentResult result;
  result.protocol = Protocol::Drift;

  for (const auto &cell : cells) {
    const auto kernel = kernel_for(cell, spec.ell);
    const Point m = Point::Ones(cell.dim);
    Point e = Point::Zero(cell.dim);
    e(0) = 1.0;

    DriftSeries series;
    series.cell = cell;
    for (std::size_t ri = 0; ri < spec.r_grid.size(); ++ri) {
      const double r = spec.r_grid[ri];
      const Point x = m - 0.5 * r * e;
      const Point y = m + 0.5 * r * e;
      // Separation as actually represented in floating point.
      const double r0 = (y - x).norm();
      std::vector<double> change(reps);
      parallel_for(reps, spec.threads, [&](Integer rep) {
        Rng rng(derive_seed({replication_seed(spec.base_seed, cell, rep),
                             static_cast<std::uint64_t>(ri)}));
        const auto next = coupled_step({x, y, false, 0}, kernel, rng);
        change[rep] = (next.y - next.x).norm() - r0;
      });
      const auto s = summarize_sample(change);
      series.points.push_back({r, *s.mean, s.se.value_or(0.0), reps});
    }
    result.drift.push_back(std::move(series));
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentSpec &spec) {
  switch (spec.protocol) {
  case Protocol::Meet:
    return run_meet_sweep(spec);
  case Protocol::Trace:
    return run_trace(spec);
  case Protocol::Drift:
    return run_drift(spec);
  }
  throw DomainError("unknown protocol");
}

std::vector<double> drift_sign_changes(const DriftSeries &series) {
  std::vector<double> out;
  const auto &p = series.points;
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double a = p[i - 1].mean_drift;
    const double b = p[i].mean_drift;
    if ((a > 0.0) != (b > 0.0))
      out.push_back(p[i - 1].r + (p[i].r - p[i - 1].r) * a / (a - b));
  }
  return out;
}

SampleSummary summarize_sample(std::vector<double> values) {
  SampleSummary s;
  const auto n = values.size();
  if (n == 0)
    return s;
  double sum = 0.0;
  for (double v : values)
    sum += v;
  const double mean = sum / static_cast<double>(n);
  s.mean = mean;
  if (n > 1) {
    double ss = 0.0;
    for (double v : values)
      ss += (v - mean) * (v - mean);
    s.se = std::sqrt(ss / static_cast<double>(n - 1)) /
           std::sqrt(static_cast<double>(n));
  }
  std::sort(values.begin(), values.end());
  s.median = n % 2 == 1 ? values[n / 2]
                        : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return s;
}

std::vector<CellSummary> summarize(const ExperimentResult &result) {
  std::vector<CellSummary> out;
  std::vector<std::vector<double>> taus;
  auto same_cell = [](const Cell &a, const Cell &b) {
    return a.dim == b.dim && a.proposal.kind == b.proposal.kind &&
           a.acceptance == b.acceptance &&
           (a.proposal.kind != ProposalKind::Hybrid ||
            a.proposal.hybrid_cutoff == b.proposal.hybrid_cutoff);
  };
  for (const auto &rec : result.meet) {
    auto it = std::find_if(out.begin(), out.end(), [&](const CellSummary &s) {
      return same_cell(s.cell, rec.cell);
    });
    std::size_t idx;
    if (it == out.end()) {
      CellSummary fresh;
      fresh.cell = rec.cell;
      out.push_back(fresh);
      taus.emplace_back();
      idx = out.size() - 1;
    } else {
      idx = static_cast<std::size_t>(it - out.begin());
    }
    auto &s = out[idx];
    ++s.n;
    if (rec.censored)
      ++s.censored_count;
    else
      taus[idx].push_back(static_cast<double>(rec.tau));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto s = summarize_sample(taus[i]);
    out[i].mean_tau = s.mean;
    out[i].se_tau = s.se;
    out[i].median_tau = s.median;
  }
  return out;
}

} // namespace crwm
