#ifndef COUPLED_RWM_EXPERIMENTS_HPP
#define COUPLED_RWM_EXPERIMENTS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coupled_rwm/kernel.hpp"

namespace crwm {

enum class Protocol { Meet, Trace, Drift };

/// A proposal coupling together with its hybrid cutoff (ignored unless the
/// kind is Hybrid).
struct ProposalChoice {
  ProposalKind kind = ProposalKind::MaxReflection;
  double hybrid_cutoff = std::numeric_limits<double>::infinity();

  /// "max-reflection", or "hybrid:<cutoff>" for hybrids.
  std::string label() const;
};

struct ExperimentSpec {
  Protocol protocol = Protocol::Meet;
  std::vector<Integer> dims{10};
  std::vector<ProposalChoice> proposals{{}};
  std::vector<AcceptanceKind> acceptances{AcceptanceKind::Common};
  Integer replications = 1000;
  std::uint64_t base_seed = 0;
  Integer t_max = kDefaultTMax;
  double ell = kDefaultEll;
  /// Trace: number of coupled steps after t = 0.
  Integer horizon = 2500;
  /// Drift: separations at which one coupled step is taken.
  std::vector<double> r_grid;
  /// Worker threads; 0 means hardware concurrency. Never affects results.
  unsigned threads = 1;
};

/// Throws DomainError on an empty sweep or nonpositive counts.
void validate(const ExperimentSpec &spec);

struct Cell {
  Integer dim = 0;
  ProposalChoice proposal;
  AcceptanceKind acceptance = AcceptanceKind::Common;
};

/// Cells in sweep order: dims, then proposals, then acceptances.
std::vector<Cell> expand_cells(const ExperimentSpec &spec);

/// Per-replication stream seed; depends only on the cell contents, not on
/// its position in the sweep.
std::uint64_t replication_seed(std::uint64_t base_seed, const Cell &cell,
                               Integer replication);

struct MeetRecord {
  Cell cell;
  Integer replication = 0;
  std::uint64_t seed = 0;
  /// Iteration count; equals t_max when censored.
  Integer tau = 0;
  bool censored = false;
};

struct TracePoint {
  Integer t = 0;
  double mean_r = 0.0;
  /// Replications not yet met at t.
  Integer n_alive = 0;
};

struct TraceSeries {
  Cell cell;
  std::vector<TracePoint> points;
};

struct DriftPoint {
  double r = 0.0;
  double mean_drift = 0.0;
  double se = 0.0;
  Integer n = 0;
};

struct DriftSeries {
  Cell cell;
  std::vector<DriftPoint> points;
};

struct ExperimentResult {
  Protocol protocol = Protocol::Meet;
  std::vector<MeetRecord> meet;
  std::vector<TraceSeries> trace;
  std::vector<DriftSeries> drift;
};

/// Meeting times from iid N(0, I_d) starts, every (dim, proposal,
/// acceptance) cell times replications.
ExperimentResult run_meet_sweep(const ExperimentSpec &spec);

/// Mean |Y_t - X_t| over replications for t = 0 .. horizon, with sticky
/// chains after meeting.
ExperimentResult run_trace(const ExperimentSpec &spec);

/// Mean one-step change of |Y - X| from x = m - (r/2) e1, y = m + (r/2) e1,
/// m = (1, ..., 1).
ExperimentResult run_drift(const ExperimentSpec &spec);

ExperimentResult run_experiment(const ExperimentSpec &spec);

struct CellSummary {
  Cell cell;
  Integer n = 0;
  Integer censored_count = 0;
  std::optional<double> mean_tau;
  std::optional<double> se_tau;
  std::optional<double> median_tau;
};

/// One row per meet cell, in sweep order. Censored runs are excluded from
/// mean, SE and median and counted separately.
std::vector<CellSummary> summarize(const ExperimentResult &result);

/// Separations where the drift curve changes sign, each located by linear
/// interpolation between neighbouring grid points. Zero counts as negative.
std::vector<double> drift_sign_changes(const DriftSeries &series);

struct SampleSummary {
  std::optional<double> mean;
  std::optional<double> se;
  std::optional<double> median;
};

/// mean, standard error sd/sqrt(n) and median of a sample.
SampleSummary summarize_sample(std::vector<double> values);

/// Runs body(i) for i in [0, n) on up to `threads` workers.
void parallel_for(Integer n, unsigned threads,
                  const std::function<void(Integer)> &body);

} // namespace crwm

#endif
