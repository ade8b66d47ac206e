#include "coupled_rwm/acccpl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace crwm {

namespace {

void check_rate(double a, const char *what) {
  if (!(a >= 0.0 && a <= 1.0))
    throw DomainError(std::string(what) + " must lie in [0, 1]");
}

// Uniform on (lo, hi) given a unit uniform; never rounds down onto lo.
double stretch(double unit, double lo, double hi) {
  const double z = lo + (hi - lo) * unit;
  return z > lo ? z : std::nextafter(lo, hi);
}

} // namespace

std::string_view to_string(AcceptanceKind kind) {
  switch (kind) {
  case AcceptanceKind::Common:
    return "common";
  case AcceptanceKind::IndependentUV:
    return "independent";
  case AcceptanceKind::Antithetic:
    return "antithetic";
  case AcceptanceKind::OptimalTransport:
    return "ot";
  }
  return "unknown";
}

AcceptanceKind parse_acceptance_kind(std::string_view name) {
  for (auto kind : {AcceptanceKind::Common, AcceptanceKind::IndependentUV,
                    AcceptanceKind::Antithetic,
                    AcceptanceKind::OptimalTransport})
    if (to_string(kind) == name)
      return kind;
  throw DomainError("unknown acceptance coupling '" + std::string(name) + "'");
}

double mh_ratio(double log_pi_cur, double log_pi_prop) {
  if (std::isinf(log_pi_cur) && log_pi_cur < 0.0)
    throw DomainError("mh_ratio: current state has zero target density");
  if (std::isinf(log_pi_prop) && log_pi_prop < 0.0)
    return 0.0;
  return std::exp(std::min(0.0, log_pi_prop - log_pi_cur));
}

RhoBounds rho_bounds(double a_x, double a_y) {
  check_rate(a_x, "a_x");
  check_rate(a_y, "a_y");
  return {std::max(0.0, a_x + a_y - 1.0), std::min(a_x, a_y)};
}

std::pair<double, double>
sample_uniform_pair(AcceptanceKind kind, std::optional<double> rho_target,
                    double a_x, double a_y, Rng &rng) {
  const auto bounds = rho_bounds(a_x, a_y);
  if (!rho_target) {
    const double u = rng.uniform();
    switch (kind) {
    case AcceptanceKind::Common:
      return {u, u};
    case AcceptanceKind::Antithetic:
      return {u, 1.0 - u};
    case AcceptanceKind::IndependentUV:
      return {u, rng.uniform()};
    case AcceptanceKind::OptimalTransport:
      throw DomainError("optimal transport acceptance needs a rho target");
    }
  }

  const double rho = *rho_target;
  constexpr double slack = 1e-12;
  if (!(rho >= bounds.lo - slack && rho <= bounds.hi + slack))
    throw DomainError("rho target outside the feasible interval");
  const double p11 = std::clamp(rho, bounds.lo, bounds.hi);
  const double p10 = std::max(0.0, a_x - p11);
  const double p01 = std::max(0.0, a_y - p11);

  // Cell first, then uniforms within the cell. A margin at 0 or 1 gives the
  // opposite cells zero weight, so the decision on that side is forced.
  const double pick = rng.uniform();
  bool u_low;
  bool v_low;
  if (pick < p11) {
    u_low = true;
    v_low = true;
  } else if (pick < p11 + p10) {
    u_low = true;
    v_low = false;
  } else if (pick < p11 + p10 + p01) {
    u_low = false;
    v_low = true;
  } else {
    u_low = false;
    v_low = false;
  }
  if (a_x == 1.0)
    u_low = true;
  else if (a_x == 0.0)
    u_low = false;
  if (a_y == 1.0)
    v_low = true;
  else if (a_y == 0.0)
    v_low = false;

  const double u = u_low ? stretch(rng.uniform(), 0.0, a_x)
                         : stretch(rng.uniform(), a_x, 1.0);
  const double v = v_low ? stretch(rng.uniform(), 0.0, a_y)
                         : stretch(rng.uniform(), a_y, 1.0);
  return {u, v};
}

RhoChoice ot_rho_choice(const Point &x, const Point &y, const Point &x_prop,
                        const Point &y_prop, double a_x, double a_y) {
  require_same_dim(x.size(), y.size());
  require_same_dim(x.size(), x_prop.size());
  require_same_dim(x.size(), y_prop.size());
  const auto bounds = rho_bounds(a_x, a_y);
  // Coefficient of rho in E|Y - X|^2.
  const double c = (y_prop - x_prop).squaredNorm() -
                   (y - x_prop).squaredNorm() - (y_prop - x).squaredNorm() +
                   (y - x).squaredNorm();
  if (c > 0.0)
    return {bounds.lo, false};
  return {bounds.hi, true};
}

AcceptDecision couple_accept(const AcceptanceCouplingSpec &spec,
                             const Point &x, const Point &y,
                             const Point &x_prop, const Point &y_prop,
                             double a_x, double a_y, Rng &rng) {
  std::optional<double> rho;
  if (spec.kind == AcceptanceKind::OptimalTransport)
    rho = ot_rho_choice(x, y, x_prop, y_prop, a_x, a_y).rho;
  const auto [u, v] = sample_uniform_pair(spec.kind, rho, a_x, a_y, rng);
  return {u <= a_x, v <= a_y, u, v};
}

} // namespace crwm
