#ifndef COUPLED_RWM_GAUSS_HPP
#define COUPLED_RWM_GAUSS_HPP

#include "coupled_rwm/types.hpp"

namespace crwm {

struct NormalParams {
  double mean = 0.0;
  double sd = 1.0;
};

inline constexpr NormalParams kStandardNormal{0.0, 1.0};

double normal_pdf(double z, NormalParams p = kStandardNormal);
double normal_log_pdf(double z, NormalParams p = kStandardNormal);

double normal_cdf(double z, NormalParams p = kStandardNormal);

/// Upper tail 1 - cdf, accurate far into the right tail.
double normal_ccdf(double z, NormalParams p = kStandardNormal);

/// Throws DomainError unless 0 < u < 1.
double normal_quantile(double u, NormalParams p = kStandardNormal);

/// Phi(a) - Phi(b) for the standard normal, without cancellation in the tails.
double normal_cdf_diff(double a, double b);

/// P(chi^2_1 >= a) = 2 (1 - Phi(sqrt a)).
double chi2_1_ccdf(double a);

/// Probability that any maximal coupling of N(x, sd^2 I) and N(y, sd^2 I)
/// produces equal draws, where r = |y - x|.
double meeting_probability(double r, double sd);

/// 1 - sqrt(2/pi) r/(2 sd). Not clipped at zero.
double meeting_prob_lower_bound(double r, double sd);

/// 4 sd^2 / r^2 (infinite at r = 0).
double meeting_prob_upper_markov(double r, double sd);

/// (1 - 2s)^(-1/2) exp(-s r^2 / (4 sd^2)) for s in (0, 1/2).
double meeting_prob_upper_chernoff(double r, double sd, double s);

} // namespace crwm

#endif
