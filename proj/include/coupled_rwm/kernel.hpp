#ifndef COUPLED_RWM_KERNEL_HPP
#define COUPLED_RWM_KERNEL_HPP

#include <functional>
#include <optional>
#include <vector>

#include "coupled_rwm/acccpl.hpp"
#include "coupled_rwm/propcpl.hpp"
#include "coupled_rwm/rng.hpp"
#include "coupled_rwm/types.hpp"

namespace crwm {

inline constexpr double kDefaultEll = 2.38;
inline constexpr Integer kDefaultTMax = 1'000'000;

struct Target {
  /// log pi up to a constant; may return -infinity.
  std::function<double(const Point &)> log_density;
  Integer dim = 1;
};

/// N(0, I_d).
Target standard_normal_target(Integer dim);

struct KernelSpec {
  Target target;
  ProposalCouplingSpec proposal;
  AcceptanceCouplingSpec acceptance;
  /// Proposal standard deviation; overrides proposal.sd.
  double sd = 1.0;
};

/// N(0, I_d) target with sd = ell / sqrt(d).
KernelSpec standard_kernel(Integer dim, ProposalKind proposal,
                           AcceptanceKind acceptance, double ell = kDefaultEll,
                           double hybrid_cutoff =
                               std::numeric_limits<double>::infinity());

struct CoupledState {
  Point x;
  Point y;
  bool met = false;
  Integer t = 0;
};

/// One marginal RWM transition. Throws DomainError if pi(x) = 0.
Point rwm_step(const Point &x, const KernelSpec &spec, Rng &rng);

/// One coupled transition. Once x == y both chains share a single proposal
/// and a single uniform, so they stay equal.
CoupledState coupled_step(const CoupledState &state, const KernelSpec &spec,
                          Rng &rng);

struct MeetingResult {
  /// Empty when censored at t_max.
  std::optional<Integer> tau;
  Integer iterations = 0;
  /// |Y_t - X_t| for t = 0 .. iterations, when requested.
  std::vector<double> distances;

  bool censored() const { return !tau.has_value(); }
};

MeetingResult run_to_meeting(const Point &x0, const Point &y0,
                             const KernelSpec &spec, Integer t_max, Rng &rng,
                             bool record_distances = false);

} // namespace crwm

#endif
