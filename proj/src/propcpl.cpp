#include "coupled_rwm/propcpl.hpp"

#include <cmath>
#include <string>

#include "coupled_rwm/gauss.hpp"

namespace crwm {

namespace {

// log q(x, z) - log q(y, z) for N(., sd^2).
double log_density_gap(double z, double x, double y, double sd) {
  const double dx = z - x;
  const double dy = z - y;
  return 0.5 * (dy * dy - dx * dx) / (sd * sd);
}

// The first two steps shared by every one-dimensional maximal coupling: draw
// x' ~ N(x1, sd^2) and decide whether y' = x'.
bool draw_meet_candidate(double x1, double y1, double sd, Rng &rng,
                         double &x_prop) {
  x_prop = x1 + sd * rng.normal();
  const double w = rng.uniform();
  // W q(x, x') <= q(y, x')
  return std::log(w) + log_density_gap(x_prop, x1, y1, sd) <= 0.0;
}

Point orthogonal_part(const Point &z, const Point &e) {
  return z - e * e.dot(z);
}

// Residual mass S(w) = F_x(w) - F_y(w) for x1 < y1.
double residual_mass(double w, double x1, double y1, double sd) {
  return normal_cdf_diff((w - x1) / sd, (w - y1) / sd);
}

double ot_residual_cdf_ordered(double v, double x1, double y1, double sd) {
  const double m = 0.5 * (x1 + y1);
  if (v >= m)
    return 1.0;
  return residual_mass(v, x1, y1, sd) / residual_mass(m, x1, y1, sd);
}

// Solves S(w) = S(v) reflected across the total mass, for x1 < y1 and v < m:
// the y-residual CDF 1 - S(w)/S(m) must equal S(v)/S(m).
double ot_transport_map_ordered(double v, double x1, double y1, double sd) {
  const double m = 0.5 * (x1 + y1);
  if (!(v < m))
    throw DomainError("ot_transport_map: point outside the x-residual support");
  const double total = residual_mass(m, x1, y1, sd);
  const double target = total - residual_mass(v, x1, y1, sd);
  if (!(target > 0.0))
    throw NonConvergence("ot_transport_map: target mass underflowed");

  // S is decreasing on (m, inf). Bracket by doubling outward from y1.
  double lo = m;
  double step = sd;
  double hi = std::max(y1, m) + step;
  int expansions = 0;
  while (residual_mass(hi, x1, y1, sd) > target) {
    lo = hi;
    step *= 2.0;
    hi = y1 + step;
    if (++expansions > 64)
      throw NonConvergence("ot_transport_map: could not bracket the inverse");
  }

  int iterations = 0;
  while (hi - lo > 1e-12 * (1.0 + std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (residual_mass(mid, x1, y1, sd) > target)
      lo = mid;
    else
      hi = mid;
    if (++iterations > 400)
      throw NonConvergence("ot_transport_map: bisection budget exhausted");
  }

  // One Newton polish, kept only if it stays inside the bracket.
  double w = 0.5 * (lo + hi);
  const double slope =
      normal_pdf(w, {x1, sd}) - normal_pdf(w, {y1, sd});
  if (slope < 0.0) {
    const double polished = w - (residual_mass(w, x1, y1, sd) - target) / slope;
    if (polished >= lo && polished <= hi)
      w = polished;
  }
  return w;
}

} // namespace

void validate(const ProposalCouplingSpec &spec) {
  if (!(spec.sd > 0.0) || !std::isfinite(spec.sd))
    throw DomainError("proposal sd must be positive and finite");
  if (spec.rejection_cap <= 0)
    throw DomainError("rejection cap must be positive");
  if (spec.kind == ProposalKind::Hybrid) {
    if (!(spec.hybrid_cutoff > 0.0))
      throw DomainError("hybrid cutoff must be positive");
    if (!is_simple(spec.hybrid_far_kind))
      throw DomainError("hybrid far coupling must be a simple coupling");
  }
}

bool is_maximal(ProposalKind kind) {
  switch (kind) {
  case ProposalKind::MaxIndependent:
  case ProposalKind::MaxSemiIndependent:
  case ProposalKind::MaxOptimalTransport:
  case ProposalKind::MaxReflection:
    return true;
  default:
    return false;
  }
}

bool is_simple(ProposalKind kind) {
  switch (kind) {
  case ProposalKind::Independent:
  case ProposalKind::Synchronous:
  case ProposalKind::Reflection:
  case ProposalKind::FullReflection:
    return true;
  default:
    return false;
  }
}

std::string_view to_string(ProposalKind kind) {
  switch (kind) {
  case ProposalKind::Independent:
    return "independent";
  case ProposalKind::Synchronous:
    return "synchronous";
  case ProposalKind::Reflection:
    return "reflection";
  case ProposalKind::FullReflection:
    return "full-reflection";
  case ProposalKind::MaxIndependent:
    return "max-independent";
  case ProposalKind::MaxSemiIndependent:
    return "max-semi-independent";
  case ProposalKind::MaxOptimalTransport:
    return "max-ot";
  case ProposalKind::MaxReflection:
    return "max-reflection";
  case ProposalKind::Hybrid:
    return "hybrid";
  }
  return "unknown";
}

ProposalKind parse_proposal_kind(std::string_view name) {
  for (auto kind :
       {ProposalKind::Independent, ProposalKind::Synchronous,
        ProposalKind::Reflection, ProposalKind::FullReflection,
        ProposalKind::MaxIndependent, ProposalKind::MaxSemiIndependent,
        ProposalKind::MaxOptimalTransport, ProposalKind::MaxReflection,
        ProposalKind::Hybrid})
    if (to_string(kind) == name)
      return kind;
  throw DomainError("unknown proposal coupling '" + std::string(name) + "'");
}

ProposalPair assemble(const PairGeometry<double> &geom,
                      const SplitProposal &split) {
  ProposalPair out;
  out.x_prop = geom.e * split.along.x + split.x_perp;
  if (split.along.met) {
    out.y_prop = out.x_prop;
    out.proposed_meet = true;
  } else {
    out.y_prop = geom.e * split.along.y + split.y_perp;
    out.proposed_meet = bitwise_equal(out.x_prop, out.y_prop);
  }
  return out;
}

ProposalPair sample_independent(const Point &x, const Point &y, double sd,
                                Rng &rng) {
  require_same_dim(x.size(), y.size());
  ProposalPair out;
  out.x_prop = x + rng.normal(x.size(), sd);
  out.y_prop = y + rng.normal(y.size(), sd);
  out.proposed_meet = bitwise_equal(out.x_prop, out.y_prop);
  return out;
}

ProposalPair sample_synchronous(const Point &x, const Point &y, double sd,
                                Rng &rng) {
  require_same_dim(x.size(), y.size());
  const Point xi = rng.normal(x.size(), sd);
  ProposalPair out;
  out.x_prop = x + xi;
  out.y_prop = y + xi;
  out.proposed_meet = bitwise_equal(out.x_prop, out.y_prop);
  return out;
}

ProposalPair sample_reflection(const Point &x, const Point &y, double sd,
                               Rng &rng) {
  const auto geom = pair_geometry(x, y);
  const Point xi = rng.normal(x.size(), sd);
  ProposalPair out;
  out.x_prop = x + xi;
  out.y_prop = y + reflect(xi, geom.e);
  out.proposed_meet = bitwise_equal(out.x_prop, out.y_prop);
  return out;
}

ProposalPair sample_full_reflection(const Point &x, const Point &y, double sd,
                                    Rng &rng) {
  require_same_dim(x.size(), y.size());
  if (bitwise_equal(x, y))
    throw DegeneratePair();
  const Point xi = rng.normal(x.size(), sd);
  ProposalPair out;
  out.x_prop = x + xi;
  out.y_prop = y - xi;
  out.proposed_meet = bitwise_equal(out.x_prop, out.y_prop);
  return out;
}

Pair1d sample_max_independent_1d(double x1, double y1, double sd, Rng &rng,
                                 Integer rejection_cap) {
  if (rejection_cap <= 0)
    throw DomainError("rejection cap must be positive");
  Pair1d out;
  if (draw_meet_candidate(x1, y1, sd, rng, out.x)) {
    out.y = out.x;
    out.met = true;
    return out;
  }
  for (Integer k = 0; k < rejection_cap; ++k) {
    const double y_tilde = y1 + sd * rng.normal();
    const double w = rng.uniform();
    // W q(y, y~) > q(x, y~)
    if (std::log(w) + log_density_gap(y_tilde, y1, x1, sd) > 0.0) {
      out.y = y_tilde;
      out.met = false;
      return out;
    }
  }
  throw RejectionCapExceeded(rejection_cap);
}

double ot_residual_cdf(double v, double x1, double y1, double sd) {
  if (!(sd > 0.0))
    throw DomainError("ot_residual_cdf: sd must be positive");
  if (x1 == y1)
    throw DomainError("ot_residual_cdf: residuals are empty when x1 == y1");
  if (x1 < y1)
    return ot_residual_cdf_ordered(v, x1, y1, sd);
  // Mirror through the origin: P(x' <= v) = 1 - P(-x' <= -v).
  return 1.0 - ot_residual_cdf_ordered(-v, -x1, -y1, sd);
}

double ot_transport_map(double v, double x1, double y1, double sd) {
  if (!(sd > 0.0))
    throw DomainError("ot_transport_map: sd must be positive");
  if (x1 == y1)
    throw DomainError("ot_transport_map: residuals are empty when x1 == y1");
  if (x1 < y1)
    return ot_transport_map_ordered(v, x1, y1, sd);
  return -ot_transport_map_ordered(-v, -x1, -y1, sd);
}

Pair1d sample_max_ot_1d(double x1, double y1, double sd, Rng &rng) {
  Pair1d out;
  out.met = draw_meet_candidate(x1, y1, sd, rng, out.x);
  out.y = out.met ? out.x : ot_transport_map(out.x, x1, y1, sd);
  return out;
}

Pair1d sample_max_reflection_1d(double x1, double y1, double sd, Rng &rng) {
  Pair1d out;
  out.met = draw_meet_candidate(x1, y1, sd, rng, out.x);
  out.y = out.met ? out.x : y1 - (out.x - x1);
  return out;
}

SplitProposal split_max_independent(const PairGeometry<double> &geom,
                                    double sd, Rng &rng,
                                    Integer rejection_cap) {
  const double x1 = geom.m1 - 0.5 * geom.r;
  const double y1 = geom.m1 + 0.5 * geom.r;
  SplitProposal out;
  out.along = sample_max_independent_1d(x1, y1, sd, rng, rejection_cap);
  const Eigen::Index d = geom.dim();
  out.x_perp = geom.m_perp + orthogonal_part(rng.normal(d, sd), geom.e);
  if (out.along.met)
    out.y_perp = out.x_perp;
  else
    out.y_perp = geom.m_perp + orthogonal_part(rng.normal(d, sd), geom.e);
  return out;
}

SplitProposal split_max_semi_independent(const PairGeometry<double> &geom,
                                         double sd, Rng &rng,
                                         Integer rejection_cap) {
  const double x1 = geom.m1 - 0.5 * geom.r;
  const double y1 = geom.m1 + 0.5 * geom.r;
  SplitProposal out;
  out.along = sample_max_independent_1d(x1, y1, sd, rng, rejection_cap);
  out.x_perp =
      geom.m_perp + orthogonal_part(rng.normal(geom.dim(), sd), geom.e);
  out.y_perp = out.x_perp;
  return out;
}

SplitProposal split_max_ot(const PairGeometry<double> &geom, double sd,
                           Rng &rng) {
  const double x1 = geom.m1 - 0.5 * geom.r;
  const double y1 = geom.m1 + 0.5 * geom.r;
  SplitProposal out;
  out.along = sample_max_ot_1d(x1, y1, sd, rng);
  out.x_perp =
      geom.m_perp + orthogonal_part(rng.normal(geom.dim(), sd), geom.e);
  out.y_perp = out.x_perp;
  return out;
}

SplitProposal split_max_reflection(const PairGeometry<double> &geom, double sd,
                                   Rng &rng) {
  const double x1 = geom.m1 - 0.5 * geom.r;
  const double y1 = geom.m1 + 0.5 * geom.r;
  SplitProposal out;
  out.along = sample_max_reflection_1d(x1, y1, sd, rng);
  out.x_perp =
      geom.m_perp + orthogonal_part(rng.normal(geom.dim(), sd), geom.e);
  out.y_perp = out.x_perp;
  return out;
}

ProposalPair sample_max_independent(const Point &x, const Point &y, double sd,
                                    Rng &rng, Integer rejection_cap) {
  const auto geom = pair_geometry(x, y);
  return assemble(geom, split_max_independent(geom, sd, rng, rejection_cap));
}

ProposalPair sample_max_semi_independent(const Point &x, const Point &y,
                                         double sd, Rng &rng,
                                         Integer rejection_cap) {
  const auto geom = pair_geometry(x, y);
  return assemble(geom,
                  split_max_semi_independent(geom, sd, rng, rejection_cap));
}

ProposalPair sample_max_ot(const Point &x, const Point &y, double sd,
                           Rng &rng) {
  const auto geom = pair_geometry(x, y);
  return assemble(geom, split_max_ot(geom, sd, rng));
}

ProposalPair sample_max_reflection(const Point &x, const Point &y, double sd,
                                   Rng &rng) {
  const auto geom = pair_geometry(x, y);
  return assemble(geom, split_max_reflection(geom, sd, rng));
}

ProposalPair sample_hybrid(const Point &x, const Point &y,
                           const ProposalCouplingSpec &spec, Rng &rng) {
  require_same_dim(x.size(), y.size());
  const double r = (y - x).norm();
  const double threshold =
      spec.hybrid_cutoff / std::sqrt(static_cast<double>(x.size()));
  if (r < threshold)
    return sample_max_reflection(x, y, spec.sd, rng);
  ProposalCouplingSpec far = spec;
  far.kind = spec.hybrid_far_kind;
  return sample_proposal(x, y, far, rng);
}

ProposalPair sample_max_independent_diag(const Point &x, const Point &y,
                                         const Point &scale, Rng &rng,
                                         Integer rejection_cap) {
  require_same_dim(x.size(), y.size());
  require_same_dim(x.size(), scale.size());
  if ((scale.array() <= 0.0).any())
    throw DomainError("diagonal scale must be positive");
  const Point origin = Point::Zero(x.size());
  const Point target = ((y - x).array() / scale.array()).matrix();
  const auto unit = sample_max_independent(origin, target, 1.0, rng,
                                           rejection_cap);
  ProposalPair out;
  out.x_prop = x + (scale.array() * unit.x_prop.array()).matrix();
  if (unit.proposed_meet) {
    out.y_prop = out.x_prop;
    out.proposed_meet = true;
  } else {
    out.y_prop = x + (scale.array() * unit.y_prop.array()).matrix();
    out.proposed_meet = bitwise_equal(out.x_prop, out.y_prop);
  }
  return out;
}

ProposalPair sample_proposal(const Point &x, const Point &y,
                             const ProposalCouplingSpec &spec, Rng &rng) {
  switch (spec.kind) {
  case ProposalKind::Independent:
    return sample_independent(x, y, spec.sd, rng);
  case ProposalKind::Synchronous:
    return sample_synchronous(x, y, spec.sd, rng);
  case ProposalKind::Reflection:
    return sample_reflection(x, y, spec.sd, rng);
  case ProposalKind::FullReflection:
    return sample_full_reflection(x, y, spec.sd, rng);
  case ProposalKind::MaxIndependent:
    return sample_max_independent(x, y, spec.sd, rng, spec.rejection_cap);
  case ProposalKind::MaxSemiIndependent:
    return sample_max_semi_independent(x, y, spec.sd, rng,
                                       spec.rejection_cap);
  case ProposalKind::MaxOptimalTransport:
    return sample_max_ot(x, y, spec.sd, rng);
  case ProposalKind::MaxReflection:
    return sample_max_reflection(x, y, spec.sd, rng);
  case ProposalKind::Hybrid:
    return sample_hybrid(x, y, spec, rng);
  }
  throw DomainError("unhandled proposal kind");
}

} // namespace crwm
