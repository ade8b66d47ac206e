#include "coupled_rwm/kernel.hpp"

#include <cmath>

namespace crwm {

namespace {

ProposalCouplingSpec effective_proposal(const KernelSpec &spec) {
  ProposalCouplingSpec p = spec.proposal;
  p.sd = spec.sd;
  return p;
}

} // namespace

Target standard_normal_target(Integer dim) {
  if (dim < 1)
    throw DomainError("target dimension must be positive");
  return {[](const Point &z) { return -0.5 * z.squaredNorm(); }, dim};
}

KernelSpec standard_kernel(Integer dim, ProposalKind proposal,
                           AcceptanceKind acceptance, double ell,
                           double hybrid_cutoff) {
  if (!(ell > 0.0))
    throw DomainError("ell must be positive");
  KernelSpec spec;
  spec.target = standard_normal_target(dim);
  spec.sd = ell / std::sqrt(static_cast<double>(dim));
  spec.proposal.kind = proposal;
  spec.proposal.sd = spec.sd;
  spec.proposal.hybrid_cutoff = hybrid_cutoff;
  spec.acceptance.kind = acceptance;
  validate(spec.proposal);
  return spec;
}

Point rwm_step(const Point &x, const KernelSpec &spec, Rng &rng) {
  require_same_dim(x.size(), spec.target.dim);
  const Point prop = x + rng.normal(x.size(), spec.sd);
  const double a =
      mh_ratio(spec.target.log_density(x), spec.target.log_density(prop));
  return rng.uniform() <= a ? prop : x;
}

CoupledState coupled_step(const CoupledState &state, const KernelSpec &spec,
                          Rng &rng) {
  require_same_dim(state.x.size(), state.y.size());
  require_same_dim(state.x.size(), spec.target.dim);
  CoupledState next;
  next.t = state.t + 1;

  if (state.met || bitwise_equal(state.x, state.y)) {
    next.x = rwm_step(state.x, spec, rng);
    next.y = next.x;
    next.met = true;
    return next;
  }

  const auto props = sample_proposal(state.x, state.y,
                                     effective_proposal(spec), rng);
  const double a_x = mh_ratio(spec.target.log_density(state.x),
                              spec.target.log_density(props.x_prop));
  const double a_y = mh_ratio(spec.target.log_density(state.y),
                              spec.target.log_density(props.y_prop));
  const auto decision = couple_accept(spec.acceptance, state.x, state.y,
                                      props.x_prop, props.y_prop, a_x, a_y, rng);
  next.x = decision.accept_x ? props.x_prop : state.x;
  next.y = decision.accept_y ? props.y_prop : state.y;
  next.met = bitwise_equal(next.x, next.y);
  return next;
}

MeetingResult run_to_meeting(const Point &x0, const Point &y0,
                             const KernelSpec &spec, Integer t_max, Rng &rng,
                             bool record_distances) {
  if (t_max < 1)
    throw DomainError("t_max must be positive");
  require_same_dim(x0.size(), y0.size());
  MeetingResult result;
  CoupledState state{x0, y0, bitwise_equal(x0, y0), 0};
  if (record_distances)
    result.distances.push_back((state.y - state.x).norm());
  if (state.met) {
    result.tau = 0;
    return result;
  }
  while (state.t < t_max) {
    state = coupled_step(state, spec, rng);
    if (record_distances)
      result.distances.push_back((state.y - state.x).norm());
    if (state.met) {
      result.tau = state.t;
      break;
    }
  }
  result.iterations = state.t;
  return result;
}

} // namespace crwm
