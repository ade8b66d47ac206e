#ifndef COUPLED_RWM_ACCCPL_HPP
#define COUPLED_RWM_ACCCPL_HPP

#include <optional>
#include <string_view>
#include <utility>

#include "coupled_rwm/rng.hpp"
#include "coupled_rwm/types.hpp"

namespace crwm {

// Couplings of the accept/reject step. Each chain accepts at its own MH
// rate; the couplings differ only in rho = P(both accept), which must lie in
// [max(0, a_x + a_y - 1), min(a_x, a_y)].

enum class AcceptanceKind {
  Common,        ///< V = U
  IndependentUV, ///< U, V iid
  Antithetic,    ///< V = 1 - U
  OptimalTransport,
};

struct AcceptanceCouplingSpec {
  AcceptanceKind kind = AcceptanceKind::Common;
};

std::string_view to_string(AcceptanceKind kind);
AcceptanceKind parse_acceptance_kind(std::string_view name);

struct AcceptDecision {
  bool accept_x = false;
  bool accept_y = false;
  double u = 0.0;
  double v = 0.0;
};

/// min(1, pi(prop)/pi(cur)) from log-densities.
double mh_ratio(double log_pi_cur, double log_pi_prop);

struct RhoBounds {
  double lo;
  double hi;
};

RhoBounds rho_bounds(double a_x, double a_y);

/// Draws (u, v), each uniform on (0, 1). With rho_target set, the pair
/// follows the piecewise-constant density with P(u <= a_x, v <= a_y) = rho
/// and the kind is ignored.
std::pair<double, double>
sample_uniform_pair(AcceptanceKind kind, std::optional<double> rho_target,
                    double a_x, double a_y, Rng &rng);

struct RhoChoice {
  double rho;
  bool chose_upper;
};

/// Picks the endpoint of the rho interval minimizing E|Y - X|^2 after the
/// joint accept/reject step. Ties go to the upper endpoint.
RhoChoice ot_rho_choice(const Point &x, const Point &y, const Point &x_prop,
                        const Point &y_prop, double a_x, double a_y);

AcceptDecision couple_accept(const AcceptanceCouplingSpec &spec,
                             const Point &x, const Point &y,
                             const Point &x_prop, const Point &y_prop,
                             double a_x, double a_y, Rng &rng);

} // namespace crwm

#endif
