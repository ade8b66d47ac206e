#ifndef COUPLED_RWM_VALIDATE_HPP
#define COUPLED_RWM_VALIDATE_HPP

#include <functional>
#include <span>
#include <vector>

#include "coupled_rwm/rng.hpp"
#include "coupled_rwm/types.hpp"

// Statistical oracles for the sampler test batteries. Nothing here calls the
// coupling samplers; the only shared code is the gauss module.

namespace crwm {

struct KsResult {
  double stat = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov tail P(K > lambda).
double kolmogorov_ccdf(double lambda);

/// One-sample Kolmogorov-Smirnov test. Sorts a copy of the samples.
/// Throws DomainError on empty input.
KsResult ks_statistic(std::span<const double> samples,
                      const std::function<double(double)> &cdf);

/// Two-sample Kolmogorov-Smirnov test.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// |successes/n - p| <= z * sqrt(p (1 - p) / n).
bool binomial_within(Integer successes, Integer n, double p, double z);

/// Standard-normal z such that P(|Z| > z) = alpha.
double two_sided_z(double alpha);

/// Adaptive Gauss-Kronrod (7, 15) quadrature on a finite interval.
double integrate(const std::function<double(double)> &f, double a, double b,
                 double abs_tol = 1e-15, double rel_tol = 1e-12);

enum class ResidualSide { Meet, XResidual, YResidual };

/// Unnormalized densities of a maximal coupling of N(x1, sd^2), N(y1, sd^2):
/// the meet part min(q_x, q_y) and the residuals (q_x - q_y)+, (q_y - q_x)+.
double residual_density(double z, double x1, double y1, double sd,
                        ResidualSide side);

/// Total mass of a residual_density side, by quadrature.
double residual_mass(double x1, double y1, double sd, ResidualSide side);

/// Normalized CDF of one residual_density side, tabulated by quadrature on
/// panels of width sd/8 and refined inside a panel on demand.
class ResidualCdf {
public:
  ResidualCdf(double x1, double y1, double sd, ResidualSide side);

  double operator()(double z) const;
  double mass() const { return total_; }

private:
  double x1_, y1_, sd_;
  ResidualSide side_;
  double lo_, hi_;
  std::vector<double> knots_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

/// Exact draws from a normalized residual_density side by rejection from
/// N(x1, sd^2) (meet, x-residual) or N(y1, sd^2) (y-residual).
/// Throws DomainError for an empty residual and RejectionCapExceeded.
double rejection_residual_sampler(double x1, double y1, double sd,
                                  ResidualSide side, Rng &rng,
                                  Integer cap = 1'000'000);

} // namespace crwm

#endif
