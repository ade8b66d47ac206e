#include "coupled_rwm/gauss.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace crwm {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void check_sd(double sd) {
  if (!(sd > 0.0))
    throw DomainError("standard deviation must be positive");
}

// Acklam's rational approximation, lower half only (u <= 0.5).
double quantile_lower_initial(double u) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  if (u < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(u));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = u - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Standard normal quantile for u in (0, 0.5], polished with Halley steps
// against the erfc-based cdf.
double std_quantile_lower(double u) {
  double x = quantile_lower_initial(u);
  for (int k = 0; k < 2; ++k) {
    const double err = 0.5 * std::erfc(-x * kInvSqrt2) - u;
    const double t = err * std::sqrt(2.0 * std::numbers::pi) *
                     std::exp(0.5 * x * x);
    x -= t / (1.0 + 0.5 * x * t);
  }
  return x;
}

} // namespace

double normal_pdf(double z, NormalParams p) {
  check_sd(p.sd);
  const double t = (z - p.mean) / p.sd;
  return kInvSqrt2Pi / p.sd * std::exp(-0.5 * t * t);
}

double normal_log_pdf(double z, NormalParams p) {
  check_sd(p.sd);
  const double t = (z - p.mean) / p.sd;
  return -0.5 * t * t - kLogSqrt2Pi - std::log(p.sd);
}

double normal_cdf(double z, NormalParams p) {
  check_sd(p.sd);
  return 0.5 * std::erfc(-(z - p.mean) / p.sd * kInvSqrt2);
}

double normal_ccdf(double z, NormalParams p) {
  check_sd(p.sd);
  return 0.5 * std::erfc((z - p.mean) / p.sd * kInvSqrt2);
}

double normal_quantile(double u, NormalParams p) {
  if (!(u > 0.0 && u < 1.0))
    throw DomainError("normal_quantile: probability must lie in (0, 1)");
  const double z = u <= 0.5 ? std_quantile_lower(u) : -std_quantile_lower(1.0 - u);
  return p.mean + p.sd * z;
}

double normal_cdf_diff(double a, double b) {
  if (a <= 0.0 && b <= 0.0)
    return 0.5 * (std::erfc(-a * kInvSqrt2) - std::erfc(-b * kInvSqrt2));
  if (a >= 0.0 && b >= 0.0)
    return 0.5 * (std::erfc(b * kInvSqrt2) - std::erfc(a * kInvSqrt2));
  return 0.5 * (std::erf(a * kInvSqrt2) - std::erf(b * kInvSqrt2));
}

double chi2_1_ccdf(double a) {
  if (!(a >= 0.0))
    throw DomainError("chi2_1_ccdf: argument must be nonnegative");
  // 2 (1 - Phi(sqrt a)) = erfc(sqrt(a/2))
  return std::erfc(std::sqrt(0.5 * a));
}

double meeting_probability(double r, double sd) {
  if (!(r >= 0.0))
    throw DomainError("meeting_probability: r must be nonnegative");
  check_sd(sd);
  const double t = r / sd;
  return chi2_1_ccdf(0.25 * t * t);
}

double meeting_prob_lower_bound(double r, double sd) {
  if (!(r >= 0.0))
    throw DomainError("meeting_prob_lower_bound: r must be nonnegative");
  check_sd(sd);
  return 1.0 - std::sqrt(2.0 / std::numbers::pi) * r / (2.0 * sd);
}

double meeting_prob_upper_markov(double r, double sd) {
  if (!(r >= 0.0))
    throw DomainError("meeting_prob_upper_markov: r must be nonnegative");
  check_sd(sd);
  if (r == 0.0)
    return std::numeric_limits<double>::infinity();
  const double t = sd / r;
  return 4.0 * t * t;
}

double meeting_prob_upper_chernoff(double r, double sd, double s) {
  if (!(r >= 0.0))
    throw DomainError("meeting_prob_upper_chernoff: r must be nonnegative");
  check_sd(sd);
  if (!(s > 0.0 && s < 0.5))
    throw DomainError("meeting_prob_upper_chernoff: s must lie in (0, 1/2)");
  const double t = r / sd;
  return std::exp(-s * 0.25 * t * t) / std::sqrt(1.0 - 2.0 * s);
}

} // namespace crwm
