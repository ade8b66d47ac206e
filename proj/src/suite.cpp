#include "coupled_rwm/suite.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "coupled_rwm/acccpl.hpp"
#include "coupled_rwm/gauss.hpp"
#include "coupled_rwm/kernel.hpp"
#include "coupled_rwm/validate.hpp"

namespace crwm {

namespace {

constexpr ProposalKind kAllProposals[] = {
    ProposalKind::Independent,        ProposalKind::Synchronous,
    ProposalKind::Reflection,         ProposalKind::FullReflection,
    ProposalKind::MaxIndependent,     ProposalKind::MaxSemiIndependent,
    ProposalKind::MaxOptimalTransport, ProposalKind::MaxReflection,
    ProposalKind::Hybrid};

constexpr ProposalKind kMaximalProposals[] = {
    ProposalKind::MaxIndependent, ProposalKind::MaxSemiIndependent,
    ProposalKind::MaxOptimalTransport, ProposalKind::MaxReflection};

constexpr AcceptanceKind kAllAcceptances[] = {
    AcceptanceKind::Common, AcceptanceKind::IndependentUV,
    AcceptanceKind::Antithetic, AcceptanceKind::OptimalTransport};

// Upper bounds on the number of tests per battery, for Bonferroni.
constexpr int kMarginalConfigs = 3;
constexpr int kMarginalKsTests = 9 * kMarginalConfigs * 4;
constexpr int kAcceptanceGrid = 11;
constexpr int kAcceptanceModes = 6;
constexpr int kAcceptanceTests =
    kAcceptanceModes * kAcceptanceGrid * kAcceptanceGrid * 2;
constexpr int kResidualKsTests = 4 * 3 + 1;
constexpr int kKernelTests = 9 * 4 * 2 * 2;

struct PairConfig {
  Point x;
  Point y;
  double sd;
};

Point random_unit(Eigen::Index d, Rng &rng) {
  Point u = rng.normal(d, 1.0);
  while (u.norm() == 0.0)
    u = rng.normal(d, 1.0);
  return u / u.norm();
}

// Unit vector orthogonal to e; requires d >= 2.
Point orthogonal_unit(const Point &e, Rng &rng) {
  for (;;) {
    Point f = rng.normal(e.size(), 1.0);
    f -= e * e.dot(f);
    const double n = f.norm();
    if (n > 1e-6)
      return f / n;
  }
}

PairConfig pair_at_ratio(Eigen::Index d, double sd, double ratio, Rng &rng) {
  PairConfig c;
  c.sd = sd;
  c.x = rng.normal(d, 1.0);
  c.y = c.x + ratio * sd * random_unit(d, rng);
  return c;
}

ProposalCouplingSpec spec_for(ProposalKind kind, double sd, double cutoff) {
  ProposalCouplingSpec s;
  s.kind = kind;
  s.sd = sd;
  s.hybrid_cutoff = cutoff;
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

CheckResult make_result(std::string name, std::string group, bool passed,
                        std::string detail) {
  return {std::move(name), std::move(group), passed, std::move(detail)};
}

std::uint64_t kind_word(ProposalKind k) { return static_cast<std::uint64_t>(k); }

double inf_norm(const Point &v) { return v.cwiseAbs().maxCoeff(); }

} // namespace

CheckResult check_bound_sandwich() {
  const double sds[] = {0.1, 0.5, 1.0, 3.0};
  constexpr int kRadii = 50;
  int evaluated = 0;
  int failures = 0;
  std::string first_failure;
  auto record = [&](bool ok, double r, double sd) {
    ++evaluated;
    if (!ok && failures++ == 0)
      first_failure = "r=" + fmt(r) + " sd=" + fmt(sd);
  };
  for (double sd : sds) {
    for (int k = 0; k < kRadii; ++k) {
      const double r = 0.01 * std::pow(1000.0, k / double(kRadii - 1));
      const double exact = meeting_probability(r, sd);
      const double lower = meeting_prob_lower_bound(r, sd);
      const double upper = std::min(meeting_prob_upper_markov(r, sd),
                                    meeting_prob_upper_chernoff(r, sd, 0.25));
      record(lower < exact && exact < upper, r, sd);
    }
    // r = 0: the lower bound is tight.
    const double exact = meeting_probability(0.0, sd);
    const double lower = meeting_prob_lower_bound(0.0, sd);
    const double upper = std::min(meeting_prob_upper_markov(0.0, sd),
                                  meeting_prob_upper_chernoff(0.0, sd, 0.25));
    record(std::abs(lower - exact) <= 1e-12 && exact <= upper + 1e-12, 0.0, sd);
  }
  return make_result("bound-sandwich", "bounds", failures == 0,
                     std::to_string(evaluated) + " grid points, " +
                         std::to_string(failures) + " violations" +
                         (failures ? " (first " + first_failure + ")" : ""));
}

CheckResult check_maximality(ProposalKind kind, const SuiteOptions &opt) {
  const Eigen::Index dims[] = {1, 3, 10};
  const double ratios[] = {0.25, 1.0, 2.0, 4.0};
  int failures = 0;
  double worst = 0.0;
  for (auto d : dims) {
    for (std::size_t ri = 0; ri < 4; ++ri) {
      Rng rng(derive_seed({opt.seed, 101, kind_word(kind),
                           static_cast<std::uint64_t>(d), ri}));
      const auto c = pair_at_ratio(d, 1.0, ratios[ri], rng);
      const auto spec = spec_for(kind, c.sd, 1.0);
      Integer meets = 0;
      for (Integer i = 0; i < opt.draws; ++i)
        meets += sample_proposal(c.x, c.y, spec, rng).proposed_meet;
      const double p = meeting_probability((c.y - c.x).norm(), c.sd);
      const double se = std::sqrt(p * (1 - p) / double(opt.draws));
      const double z = std::abs(double(meets) / double(opt.draws) - p) / se;
      worst = std::max(worst, z);
      failures += !binomial_within(meets, opt.draws, p, 3.0);
    }
  }
  return make_result("maximality/" + std::string(to_string(kind)),
                     "maximality", failures == 0,
                     "12 configurations, max |z| = " + fmt(worst) + ", " +
                         std::to_string(failures) + " outside 3 SE");
}

CheckResult check_proposal_marginals(ProposalKind kind,
                                     const SuiteOptions &opt) {
  const double alpha = opt.alpha / kMarginalKsTests;
  const Eigen::Index dims[kMarginalConfigs] = {1, 4, 8};
  double min_p = 1.0;
  int tests = 0;
  int failures = 0;
  for (int ci = 0; ci < kMarginalConfigs; ++ci) {
    Rng rng(derive_seed({opt.seed, 202, kind_word(kind),
                         static_cast<std::uint64_t>(ci)}));
    const double sd = 0.3 + 1.7 * rng.uniform();
    const double ratio = 0.1 + 3.9 * rng.uniform();
    const auto c = pair_at_ratio(dims[ci], sd, ratio, rng);
    const double r = (c.y - c.x).norm();
    // Config 0 takes the near (maximal) branch of the hybrid, the rest the far.
    const double cutoff =
        (ci == 0 ? 2.0 : 0.5) * r * std::sqrt(double(dims[ci]));
    const auto spec = spec_for(kind, sd, cutoff);
    const Point e = (c.y - c.x) / r;
    const bool has_perp = dims[ci] >= 2;
    const Point f = has_perp ? orthogonal_unit(e, rng) : Point();

    std::vector<double> xe, xf, ye, yf;
    for (Integer i = 0; i < opt.draws; ++i) {
      const auto p = sample_proposal(c.x, c.y, spec, rng);
      xe.push_back(e.dot(p.x_prop));
      ye.push_back(e.dot(p.y_prop));
      if (has_perp) {
        xf.push_back(f.dot(p.x_prop));
        yf.push_back(f.dot(p.y_prop));
      }
    }
    auto test = [&](const std::vector<double> &s, double mean) {
      const auto ks = ks_statistic(
          s, [&](double z) { return normal_cdf(z, {mean, sd}); });
      ++tests;
      min_p = std::min(min_p, ks.p_value);
      failures += ks.p_value < alpha;
    };
    test(xe, e.dot(c.x));
    test(ye, e.dot(c.y));
    if (has_perp) {
      test(xf, f.dot(c.x));
      test(yf, f.dot(c.y));
    }
  }
  return make_result("marginals/" + std::string(to_string(kind)), "marginals",
                     failures == 0,
                     std::to_string(tests) + " KS tests, min p = " +
                         fmt(min_p) + " vs alpha " + fmt(alpha));
}

CheckResult check_acceptance_marginals(const SuiteOptions &opt) {
  const double z = two_sided_z(opt.alpha / kAcceptanceTests);
  int failures = 0;
  int tests = 0;
  std::string first;

  // Two proposal geometries for the OT rule: one choosing each endpoint.
  const Point x = Point::Zero(1);
  const Point y = Point::Ones(1);
  const Point xp_upper = Point::Constant(1, 0.4);
  const Point yp_upper = Point::Constant(1, 0.6);
  const Point xp_lower = Point::Constant(1, 0.5);
  const Point yp_lower = Point::Constant(1, 0.6);

  for (int mode = 0; mode < kAcceptanceModes; ++mode) {
    for (int i = 0; i < kAcceptanceGrid; ++i) {
      for (int j = 0; j < kAcceptanceGrid; ++j) {
        const double ax = i / double(kAcceptanceGrid - 1);
        const double ay = j / double(kAcceptanceGrid - 1);
        Rng rng(derive_seed({opt.seed, 303, static_cast<std::uint64_t>(mode),
                             static_cast<std::uint64_t>(i),
                             static_cast<std::uint64_t>(j)}));
        const auto bounds = rho_bounds(ax, ay);
        Integer acc_x = 0;
        Integer acc_y = 0;
        for (Integer k = 0; k < opt.draws; ++k) {
          double u = 0.0;
          double v = 0.0;
          switch (mode) {
          case 0:
          case 1:
          case 2: {
            const AcceptanceKind kinds[] = {AcceptanceKind::Common,
                                            AcceptanceKind::IndependentUV,
                                            AcceptanceKind::Antithetic};
            std::tie(u, v) =
                sample_uniform_pair(kinds[mode], std::nullopt, ax, ay, rng);
            break;
          }
          case 3:
            std::tie(u, v) = sample_uniform_pair(
                AcceptanceKind::OptimalTransport,
                0.5 * (bounds.lo + bounds.hi), ax, ay, rng);
            break;
          case 4:
          case 5: {
            const bool upper = mode == 4;
            const auto d = couple_accept(
                {AcceptanceKind::OptimalTransport}, x, y,
                upper ? xp_upper : xp_lower, upper ? yp_upper : yp_lower, ax,
                ay, rng);
            u = d.u;
            v = d.v;
            break;
          }
          }
          acc_x += u <= ax;
          acc_y += v <= ay;
        }
        tests += 2;
        const bool ok = binomial_within(acc_x, opt.draws, ax, z) &&
                        binomial_within(acc_y, opt.draws, ay, z);
        if (!ok && failures++ == 0)
          first = "mode " + std::to_string(mode) + " a=(" + fmt(ax) + "," +
                  fmt(ay) + ")";
      }
    }
  }
  return make_result("marginals/acceptance", "marginals", failures == 0,
                     std::to_string(tests) + " binomial tests at z = " +
                         fmt(z) + ", " + std::to_string(failures) +
                         " failures" + (failures ? " (first " + first + ")" : ""));
}

CheckResult check_residuals(ProposalKind kind, const SuiteOptions &opt) {
  const double alpha = opt.alpha / kResidualKsTests;
  Rng rng(derive_seed({opt.seed, 404, kind_word(kind)}));
  const double sd = 0.7;
  const auto c = pair_at_ratio(3, sd, 1.5, rng);
  const Point e = (c.y - c.x) / (c.y - c.x).norm();
  const double x1 = e.dot(c.x);
  const double y1 = e.dot(c.y);
  const auto spec = spec_for(kind, sd, 1.0);

  std::vector<double> meet, x_res, y_res;
  for (Integer i = 0; i < opt.draws; ++i) {
    const auto p = sample_proposal(c.x, c.y, spec, rng);
    if (p.proposed_meet) {
      meet.push_back(e.dot(p.x_prop));
    } else {
      x_res.push_back(e.dot(p.x_prop));
      y_res.push_back(e.dot(p.y_prop));
    }
  }
  const ResidualCdf meet_cdf(x1, y1, sd, ResidualSide::Meet);
  const ResidualCdf x_cdf(x1, y1, sd, ResidualSide::XResidual);
  const ResidualCdf y_cdf(x1, y1, sd, ResidualSide::YResidual);
  const auto k1 = ks_statistic(meet, [&](double z) { return meet_cdf(z); });
  const auto k2 = ks_statistic(x_res, [&](double z) { return x_cdf(z); });
  const auto k3 = ks_statistic(y_res, [&](double z) { return y_cdf(z); });
  const bool ok =
      k1.p_value >= alpha && k2.p_value >= alpha && k3.p_value >= alpha;
  return make_result("residuals/" + std::string(to_string(kind)), "residuals",
                     ok,
                     "KS p (meet, x-res, y-res) = " + fmt(k1.p_value) + ", " +
                         fmt(k2.p_value) + ", " + fmt(k3.p_value) +
                         " vs alpha " + fmt(alpha));
}

CheckResult check_ot_pushforward(const SuiteOptions &opt) {
  const double alpha = opt.alpha / kResidualKsTests;
  Rng rng(derive_seed({opt.seed, 405}));
  const double x1 = -0.3;
  const double y1 = 0.9;
  const double sd = 1.0;
  std::vector<double> mapped;
  mapped.reserve(opt.draws);
  for (Integer i = 0; i < opt.draws; ++i) {
    const double v =
        rejection_residual_sampler(x1, y1, sd, ResidualSide::XResidual, rng);
    mapped.push_back(ot_transport_map(v, x1, y1, sd));
  }
  const ResidualCdf y_cdf(x1, y1, sd, ResidualSide::YResidual);
  const auto ks = ks_statistic(mapped, [&](double z) { return y_cdf(z); });
  return make_result("residuals/ot-pushforward", "residuals",
                     ks.p_value >= alpha,
                     "KS p = " + fmt(ks.p_value) + " vs alpha " + fmt(alpha));
}

CheckResult check_reflection_identity(const ProposalSampler &sampler,
                                      const SuiteOptions &opt) {
  Rng rng(derive_seed({opt.seed, 505}));
  PairConfig c;
  Point e;
  double worst = 0.0;
  Integer non_meet = 0;
  bool meet_ok = true;
  for (Integer i = 0; i < opt.draws; ++i) {
    if (i % 1000 == 0) {
      const auto d = 1 + static_cast<Eigen::Index>(rng.uniform() * 8);
      c = pair_at_ratio(d, 0.2 + rng.uniform(), 0.2 + 3.0 * rng.uniform(),
                        rng);
      e = (c.y - c.x) / (c.y - c.x).norm();
    }
    const auto p = sampler(c.x, c.y, c.sd, rng);
    if (p.proposed_meet) {
      meet_ok = meet_ok && bitwise_equal(p.x_prop, p.y_prop);
      continue;
    }
    ++non_meet;
    const Point xi = p.x_prop - c.x;
    const Point eta = p.y_prop - c.y;
    worst = std::max(worst, inf_norm(eta - reflect(xi, e)));
  }
  const bool ok = worst <= 1e-12 && non_meet > 0 && meet_ok;
  return make_result("reflection-identity", "structural", ok,
                     std::to_string(non_meet) +
                         " non-meeting draws, max |eta - (I - 2ee')xi| = " +
                         fmt(worst));
}

CheckResult check_orthogonal_sharing(const SuiteOptions &opt) {
  Rng rng(derive_seed({opt.seed, 506}));
  int bitwise_failures = 0;
  double worst = 0.0;
  PairConfig c;
  PairGeometry<double> geom;
  for (Integer i = 0; i < opt.draws; ++i) {
    if (i % 1000 == 0) {
      const auto d = 1 + static_cast<Eigen::Index>(rng.uniform() * 8);
      c = pair_at_ratio(d, 0.2 + rng.uniform(), 0.2 + 3.0 * rng.uniform(),
                        rng);
      geom = pair_geometry(c.x, c.y);
    }
    SplitProposal splits[] = {split_max_semi_independent(geom, c.sd, rng),
                              split_max_ot(geom, c.sd, rng),
                              split_max_reflection(geom, c.sd, rng)};
    for (const auto &s : splits) {
      bitwise_failures += !bitwise_equal(s.x_perp, s.y_perp);
      const auto p = assemble(geom, s);
      const Point diff = p.y_prop - p.x_prop;
      worst = std::max(worst, inf_norm(diff - geom.e * geom.e.dot(diff)));
    }
  }
  return make_result("orthogonal-sharing", "structural",
                     bitwise_failures == 0 && worst <= 1e-12,
                     std::to_string(bitwise_failures) +
                         " unshared orthogonal draws, max |(I - ee')(y' - x')| = " +
                         fmt(worst));
}

CheckResult check_ot_monotone(const SuiteOptions &opt) {
  Rng rng(derive_seed({opt.seed, 507}));
  bool ok = true;
  Integer pairs = 0;
  for (int ci = 0; ci < 4; ++ci) {
    const auto c = pair_at_ratio(2 + ci, 1.0, 0.5 + ci, rng);
    const auto geom = pair_geometry(c.x, c.y);
    std::vector<std::pair<double, double>> along;
    for (Integer i = 0; i < opt.draws / 4; ++i) {
      const auto s = split_max_ot(geom, c.sd, rng);
      if (!s.along.met)
        along.emplace_back(s.along.x, s.along.y);
    }
    std::sort(along.begin(), along.end());
    for (std::size_t i = 1; i < along.size(); ++i)
      ok = ok && along[i - 1].second <= along[i].second;
    pairs += static_cast<Integer>(along.size());
  }
  return make_result("ot-monotone", "structural", ok && pairs > 0,
                     std::to_string(pairs) + " non-meeting pairs" +
                         (ok ? ", sorted order preserved" : ", order violated"));
}

CheckResult check_simple_structure(const SuiteOptions &opt) {
  Rng rng(derive_seed({opt.seed, 508}));
  double worst_sync = 0.0, worst_refl = 0.0, worst_norm = 0.0, worst_full = 0.0;
  PairConfig c;
  Point e;
  for (Integer i = 0; i < opt.draws; ++i) {
    if (i % 1000 == 0) {
      const auto d = 1 + static_cast<Eigen::Index>(rng.uniform() * 8);
      c = pair_at_ratio(d, 0.2 + rng.uniform(), 0.2 + 3.0 * rng.uniform(),
                        rng);
      e = (c.y - c.x) / (c.y - c.x).norm();
    }
    const auto s = sample_synchronous(c.x, c.y, c.sd, rng);
    worst_sync = std::max(
        worst_sync, inf_norm((s.y_prop - s.x_prop) - (c.y - c.x)));
    const auto r = sample_reflection(c.x, c.y, c.sd, rng);
    const Point xi = r.x_prop - c.x;
    const Point eta = r.y_prop - c.y;
    worst_refl = std::max(worst_refl, inf_norm(eta - reflect(xi, e)));
    worst_norm = std::max(worst_norm, std::abs(eta.norm() - xi.norm()));
    const auto f = sample_full_reflection(c.x, c.y, c.sd, rng);
    worst_full = std::max(worst_full, inf_norm((f.y_prop - c.y) +
                                               (f.x_prop - c.x)));
  }
  const bool ok = worst_sync <= 1e-12 && worst_refl <= 1e-12 &&
                  worst_norm <= 1e-12 && worst_full <= 1e-12;
  return make_result("simple-structure", "structural", ok,
                     "max errors: synchronous " + fmt(worst_sync) +
                         ", reflection " + fmt(worst_refl) + ", isometry " +
                         fmt(worst_norm) + ", full reflection " +
                         fmt(worst_full));
}

CheckResult check_sticky_faithfulness(const SuiteOptions &opt) {
  constexpr Integer kSteps = 10'000;
  int failures = 0;
  int runs = 0;
  Integer met_runs = 0;
  for (auto pk : kAllProposals) {
    for (auto ak : kAllAcceptances) {
      const auto kernel = standard_kernel(3, pk, ak, kDefaultEll, 1.0);
      for (int start = 0; start < 2; ++start) {
        Rng rng(derive_seed({opt.seed, 509, kind_word(pk),
                             static_cast<std::uint64_t>(ak),
                             static_cast<std::uint64_t>(start)}));
        CoupledState s;
        s.x = rng.normal(3, 1.0);
        // start 0: already equal; start 1: close enough to meet quickly
        // under the maximal couplings.
        s.y = start == 0 ? s.x : Point(s.x + 1e-3 * random_unit(3, rng));
        bool ever_met = bitwise_equal(s.x, s.y);
        bool ok = true;
        for (Integer t = 0; t < kSteps; ++t) {
          s = coupled_step(s, kernel, rng);
          const bool equal = bitwise_equal(s.x, s.y);
          if (s.met != equal || (ever_met && !equal))
            ok = false;
          ever_met = ever_met || equal;
        }
        met_runs += ever_met;
        ++runs;
        failures += !ok;
      }
    }
  }
  return make_result("sticky-faithfulness", "structural", failures == 0,
                     std::to_string(runs) + " runs of " +
                         std::to_string(kSteps) + " steps, " +
                         std::to_string(met_runs) + " met, " +
                         std::to_string(failures) + " separated after meeting");
}

CheckResult check_acceptance_cells(const SuiteOptions &opt) {
  struct Case {
    double ax, ay, rho;
  };
  const Case cases[] = {{0.7, 0.5, 0.35}, {0.3, 0.4, 0.1}, {0.9, 0.8, 0.75},
                        {0.7, 0.5, 0.5},  {0.7, 0.5, 0.2}};
  int failures = 0;
  int tests = 0;
  for (std::size_t ci = 0; ci < std::size(cases); ++ci) {
    const auto &c = cases[ci];
    Rng rng(derive_seed({opt.seed, 606, ci}));
    Integer cells[2][2] = {{0, 0}, {0, 0}};
    for (Integer i = 0; i < opt.draws; ++i) {
      const auto [u, v] = sample_uniform_pair(AcceptanceKind::OptimalTransport,
                                              c.rho, c.ax, c.ay, rng);
      ++cells[u <= c.ax][v <= c.ay];
    }
    const double expected[2][2] = {{1 - c.ax - c.ay + c.rho, c.ay - c.rho},
                                   {c.ax - c.rho, c.rho}};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        ++tests;
        failures += !binomial_within(cells[a][b], opt.draws, expected[a][b], 3.0);
      }
  }
  return make_result("acceptance-cells", "acceptance", failures == 0,
                     std::to_string(tests) + " cell frequencies, " +
                         std::to_string(failures) + " outside 3 SE");
}

CheckResult check_extremality(const SuiteOptions &opt) {
  int separated = 0;
  int failures = 0;
  const AcceptanceKind kinds[] = {AcceptanceKind::Common,
                                  AcceptanceKind::IndependentUV,
                                  AcceptanceKind::Antithetic};
  for (int i = 0; i < kAcceptanceGrid; ++i) {
    for (int j = 0; j < kAcceptanceGrid; ++j) {
      const double ax = i / double(kAcceptanceGrid - 1);
      const double ay = j / double(kAcceptanceGrid - 1);
      double rate[3];
      double se[3];
      double analytic[3] = {1.0 - std::abs(ax - ay),
                            ax * ay + (1 - ax) * (1 - ay),
                            std::abs(ax + ay - 1.0)};
      for (int k = 0; k < 3; ++k) {
        Rng rng(derive_seed({opt.seed, 607, static_cast<std::uint64_t>(i),
                             static_cast<std::uint64_t>(j),
                             static_cast<std::uint64_t>(k)}));
        Integer agree = 0;
        for (Integer n = 0; n < opt.draws; ++n) {
          const auto [u, v] =
              sample_uniform_pair(kinds[k], std::nullopt, ax, ay, rng);
          agree += (u <= ax) == (v <= ay);
        }
        rate[k] = double(agree) / double(opt.draws);
        se[k] = std::sqrt(rate[k] * (1 - rate[k]) / double(opt.draws));
      }
      for (int k = 0; k < 2; ++k) {
        const double gap = analytic[k] - analytic[k + 1];
        if (gap > 0.05) {
          ++separated;
          failures += !(rate[k] - 3 * se[k] > rate[k + 1] + 3 * se[k + 1]);
        } else {
          failures += !(rate[k] + 3 * (se[k] + se[k + 1]) >= rate[k + 1]);
        }
      }
    }
  }
  return make_result("extremality", "acceptance", failures == 0,
                     std::to_string(separated) +
                         " separated pairs, " + std::to_string(failures) +
                         " ordering violations");
}

CheckResult check_ot_rho_bounds(const SuiteOptions &opt) {
  Rng rng(derive_seed({opt.seed, 608}));
  int failures = 0;
  for (Integer i = 0; i < opt.draws; ++i) {
    const auto d = 1 + static_cast<Eigen::Index>(rng.uniform() * 5);
    const Point x = rng.normal(d, 1.0), y = rng.normal(d, 1.0);
    const Point xp = rng.normal(d, 1.0), yp = rng.normal(d, 1.0);
    const double ax = rng.uniform(), ay = rng.uniform();
    const auto b = rho_bounds(ax, ay);
    const auto choice = ot_rho_choice(x, y, xp, yp, ax, ay);
    const bool inside = choice.rho >= b.lo && choice.rho <= b.hi;
    const bool endpoint =
        choice.rho == (choice.chose_upper ? b.hi : b.lo);
    // The chosen endpoint must not have a larger expected squared distance.
    auto expected = [&](double rho) {
      return rho * (yp - xp).squaredNorm() +
             (ax - rho) * (y - xp).squaredNorm() +
             (ay - rho) * (yp - x).squaredNorm() +
             (1 - ax - ay + rho) * (y - x).squaredNorm();
    };
    const double other = choice.chose_upper ? b.lo : b.hi;
    const bool optimal =
        expected(choice.rho) <= expected(other) + 1e-9 * (1 + expected(other));
    failures += !(inside && endpoint && optimal);
  }
  return make_result("ot-rho-bounds", "acceptance", failures == 0,
                     std::to_string(opt.draws) + " random cases, " +
                         std::to_string(failures) + " failures");
}

CheckResult check_kernel_marginal_equivalence(const SuiteOptions &opt) {
  const double alpha = opt.alpha / kKernelTests;
  const double z = two_sided_z(alpha);
  int failures = 0;
  int tests = 0;
  double min_p = 1.0;
  std::string first;
  constexpr Eigen::Index d = 3;
  for (auto pk : kAllProposals) {
    for (auto ak : kAllAcceptances) {
      const auto kernel = standard_kernel(d, pk, ak, kDefaultEll, 1.0);
      Rng setup(derive_seed({opt.seed, 707, kind_word(pk),
                             static_cast<std::uint64_t>(ak)}));
      const Point x = setup.normal(d, 1.0);
      const Point y = x + 0.5 * random_unit(d, setup);
      Rng coupled_rng(derive_seed({opt.seed, 708, kind_word(pk),
                                   static_cast<std::uint64_t>(ak)}));
      Rng marginal_rng(derive_seed({opt.seed, 709, kind_word(pk),
                                    static_cast<std::uint64_t>(ak)}));
      std::vector<double> cx, cy, mx, my;
      Integer cx_moves = 0, cy_moves = 0, mx_moves = 0, my_moves = 0;
      for (Integer i = 0; i < opt.draws; ++i) {
        const auto s = coupled_step({x, y, false, 0}, kernel, coupled_rng);
        cx.push_back((s.x - x).norm());
        cy.push_back((s.y - y).norm());
        cx_moves += !bitwise_equal(s.x, x);
        cy_moves += !bitwise_equal(s.y, y);
        const Point px = rwm_step(x, kernel, marginal_rng);
        const Point py = rwm_step(y, kernel, marginal_rng);
        mx.push_back((px - x).norm());
        my.push_back((py - y).norm());
        mx_moves += !bitwise_equal(px, x);
        my_moves += !bitwise_equal(py, y);
      }
      auto two_prop = [&](Integer a, Integer b) {
        const double n = double(opt.draws);
        const double pa = a / n, pb = b / n;
        const double pooled = (a + b) / (2 * n);
        const double se = std::sqrt(2 * pooled * (1 - pooled) / n);
        return se == 0.0 ? pa == pb : std::abs(pa - pb) <= z * se;
      };
      const auto kx = ks_two_sample(cx, mx);
      const auto ky = ks_two_sample(cy, my);
      min_p = std::min({min_p, kx.p_value, ky.p_value});
      const bool ok = kx.p_value >= alpha && ky.p_value >= alpha &&
                      two_prop(cx_moves, mx_moves) &&
                      two_prop(cy_moves, my_moves);
      tests += 4;
      if (!ok && failures++ == 0)
        first = std::string(to_string(pk)) + "/" + std::string(to_string(ak));
    }
  }
  return make_result("kernel-marginal-equivalence", "kernel", failures == 0,
                     std::to_string(tests) + " tests, min KS p = " +
                         fmt(min_p) + ", " + std::to_string(failures) +
                         " failing specs" + (failures ? " (first " + first + ")" : ""));
}

CheckResult check_pushforward(const SuiteOptions &opt) {
  const double target_distance[] = {0.5, 1.0, 2.0, 4.0};
  Point scale(4);
  scale << 0.5, 1.0, 2.0, 3.0;
  int failures = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < std::size(target_distance); ++k) {
    Rng rng(derive_seed({opt.seed, 808, k}));
    const Point x = rng.normal(4, 1.0);
    // Direction in whitened coordinates, scaled to the target distance.
    const Point white = target_distance[k] * random_unit(4, rng);
    const Point y = x + (scale.array() * white.array()).matrix();
    const double dist =
        ((y - x).array() / scale.array()).matrix().norm();
    const double p = chi2_1_ccdf(dist * dist / 4.0);
    Integer meets = 0;
    std::vector<double> first_x, last_y;
    for (Integer i = 0; i < opt.draws; ++i) {
      const auto pr = sample_max_independent_diag(x, y, scale, rng);
      meets += pr.proposed_meet;
      first_x.push_back(pr.x_prop(0));
      last_y.push_back(pr.y_prop(3));
    }
    const double se = std::sqrt(p * (1 - p) / double(opt.draws));
    worst = std::max(worst, std::abs(double(meets) / double(opt.draws) - p) / se);
    failures += !binomial_within(meets, opt.draws, p, 3.0);
    const double alpha = opt.alpha / 8.0;
    const auto k1 = ks_statistic(first_x, [&](double z) {
      return normal_cdf(z, {x(0), scale(0)});
    });
    const auto k2 = ks_statistic(last_y, [&](double z) {
      return normal_cdf(z, {y(3), scale(3)});
    });
    failures += (k1.p_value < alpha) + (k2.p_value < alpha);
  }
  return make_result("gaussian-pushforward", "pushforward", failures == 0,
                     "4 Mahalanobis distances, max |z| = " + fmt(worst) + ", " +
                         std::to_string(failures) + " failures");
}

std::vector<NamedCheck> default_suite(const SuiteOptions &options) {
  std::vector<NamedCheck> suite;
  auto add = [&](std::string name, std::string group,
                 std::function<CheckResult()> fn) {
    suite.push_back({std::move(name), std::move(group), std::move(fn)});
  };
  const SuiteOptions opt = options;
  add("bound-sandwich", "bounds", [] { return check_bound_sandwich(); });
  for (auto k : kMaximalProposals)
    add("maximality/" + std::string(to_string(k)), "maximality",
        [opt, k] { return check_maximality(k, opt); });
  for (auto k : kAllProposals)
    add("marginals/" + std::string(to_string(k)), "marginals",
        [opt, k] { return check_proposal_marginals(k, opt); });
  add("marginals/acceptance", "marginals",
      [opt] { return check_acceptance_marginals(opt); });
  for (auto k : kMaximalProposals)
    add("residuals/" + std::string(to_string(k)), "residuals",
        [opt, k] { return check_residuals(k, opt); });
  add("residuals/ot-pushforward", "residuals",
      [opt] { return check_ot_pushforward(opt); });
  add("reflection-identity", "structural",
      [opt] { return check_reflection_identity(opt.max_reflection, opt); });
  add("orthogonal-sharing", "structural",
      [opt] { return check_orthogonal_sharing(opt); });
  add("ot-monotone", "structural", [opt] { return check_ot_monotone(opt); });
  add("simple-structure", "structural",
      [opt] { return check_simple_structure(opt); });
  add("sticky-faithfulness", "structural",
      [opt] { return check_sticky_faithfulness(opt); });
  add("acceptance-cells", "acceptance", [opt] { return check_acceptance_cells(opt); });
  add("extremality", "acceptance", [opt] { return check_extremality(opt); });
  add("ot-rho-bounds", "acceptance", [opt] { return check_ot_rho_bounds(opt); });
  add("kernel-marginal-equivalence", "kernel",
      [opt] { return check_kernel_marginal_equivalence(opt); });
  add("gaussian-pushforward", "pushforward",
      [opt] { return check_pushforward(opt); });
  return suite;
}

std::vector<std::string> suite_groups(const std::vector<NamedCheck> &suite) {
  std::vector<std::string> groups;
  for (const auto &c : suite)
    if (std::find(groups.begin(), groups.end(), c.group) == groups.end())
      groups.push_back(c.group);
  return groups;
}

std::vector<CheckResult> run_suite(const std::vector<NamedCheck> &suite,
                                   const std::optional<std::string> &only) {
  std::vector<CheckResult> results;
  for (const auto &c : suite) {
    if (only && c.group != *only && c.name != *only)
      continue;
    try {
      results.push_back(c.run());
    } catch (const std::exception &ex) {
      results.push_back({c.name, c.group, false,
                         std::string("exception: ") + ex.what()});
    }
  }
  return results;
}

void print_results(std::ostream &os, const std::vector<CheckResult> &results) {
  std::size_t width = 4;
  for (const auto &r : results)
    width = std::max(width, r.name.size());
  for (const auto &r : results)
    os << (r.passed ? "PASS  " : "FAIL  ") << std::left
       << std::setw(static_cast<int>(width) + 2) << r.name << r.detail << '\n';
}

bool all_passed(const std::vector<CheckResult> &results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult &r) { return r.passed; });
}

} // namespace crwm
