#include "coupled_rwm/validate.hpp"

#include <algorithm>
#include <cmath>

#include "coupled_rwm/gauss.hpp"

namespace crwm {

namespace {

constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Gk15 {
  double kronrod;
  double error;
};

Gk15 gk15(const std::function<double(double)> &f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double sum = f(c - dx) + f(c + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1)
      gauss += kWg[j / 2] * sum;
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

double integrate_rec(const std::function<double(double)> &f, double a,
                     double b, double abs_tol, double rel_tol, int depth) {
  const auto est = gk15(f, a, b);
  if (depth >= 40 ||
      est.error <= std::max(abs_tol, rel_tol * std::abs(est.kronrod)))
    return est.kronrod;
  const double mid = 0.5 * (a + b);
  return integrate_rec(f, a, mid, 0.5 * abs_tol, rel_tol, depth + 1) +
         integrate_rec(f, mid, b, 0.5 * abs_tol, rel_tol, depth + 1);
}

KsResult ks_finish(double stat, double n_eff) {
  const double root = std::sqrt(n_eff);
  const double lambda = (root + 0.12 + 0.11 / root) * stat;
  return {stat, kolmogorov_ccdf(lambda)};
}

} // namespace

double kolmogorov_ccdf(double lambda) {
  if (lambda < 0.2)
    return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-18)
      break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_statistic(std::span<const double> samples,
                      const std::function<double(double)> &cdf) {
  if (samples.empty())
    throw DomainError("ks_statistic: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double below = f - static_cast<double>(i) / n;
    const double above = static_cast<double>(i + 1) / n - f;
    stat = std::max({stat, below, above});
  }
  return ks_finish(stat, n);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty())
    throw DomainError("ks_two_sample: no samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double stat = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v)
      ++i;
    while (j < sb.size() && sb[j] == v)
      ++j;
    stat = std::max(stat, std::abs(static_cast<double>(i) / na -
                                   static_cast<double>(j) / nb));
  }
  return ks_finish(stat, na * nb / (na + nb));
}

bool binomial_within(Integer successes, Integer n, double p, double z) {
  if (n <= 0)
    throw DomainError("binomial_within: n must be positive");
  const double phat = static_cast<double>(successes) / static_cast<double>(n);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return std::abs(phat - p) <= z * se;
}

double two_sided_z(double alpha) {
  return normal_quantile(1.0 - 0.5 * alpha);
}

double integrate(const std::function<double(double)> &f, double a, double b,
                 double abs_tol, double rel_tol) {
  if (a == b)
    return 0.0;
  if (a > b)
    return -integrate(f, b, a, abs_tol, rel_tol);
  return integrate_rec(f, a, b, abs_tol, rel_tol, 0);
}

double residual_density(double z, double x1, double y1, double sd,
                        ResidualSide side) {
  const double qx = normal_pdf(z, {x1, sd});
  const double qy = normal_pdf(z, {y1, sd});
  switch (side) {
  case ResidualSide::Meet:
    return std::min(qx, qy);
  case ResidualSide::XResidual:
    return std::max(0.0, qx - qy);
  case ResidualSide::YResidual:
    return std::max(0.0, qy - qx);
  }
  return 0.0;
}

double residual_mass(double x1, double y1, double sd, ResidualSide side) {
  return ResidualCdf(x1, y1, sd, side).mass();
}

ResidualCdf::ResidualCdf(double x1, double y1, double sd, ResidualSide side)
    : x1_(x1), y1_(y1), sd_(sd), side_(side) {
  if (!(sd > 0.0))
    throw DomainError("ResidualCdf: sd must be positive");
  lo_ = std::min(x1, y1) - 40.0 * sd;
  hi_ = std::max(x1, y1) + 40.0 * sd;
  const double m = 0.5 * (x1 + y1);
  const double width = sd / 8.0;
  // The densities have a kink at m, so m is always a knot.
  for (double z = m; z > lo_; z -= width)
    knots_.push_back(z);
  std::reverse(knots_.begin(), knots_.end());
  knots_.insert(knots_.begin(), lo_);
  for (double z = m + width; z < hi_; z += width)
    knots_.push_back(z);
  knots_.push_back(hi_);

  auto f = [this](double z) {
    return residual_density(z, x1_, y1_, sd_, side_);
  };
  cumulative_.assign(knots_.size(), 0.0);
  for (std::size_t i = 1; i < knots_.size(); ++i)
    cumulative_[i] = cumulative_[i - 1] + integrate(f, knots_[i - 1], knots_[i]);
  total_ = cumulative_.back();
  if (total_ <= 0.0)
    throw DomainError("ResidualCdf: residual has zero mass");
}

double ResidualCdf::operator()(double z) const {
  if (z <= lo_)
    return 0.0;
  if (z >= hi_)
    return 1.0;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), z);
  const auto i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  auto f = [this](double t) {
    return residual_density(t, x1_, y1_, sd_, side_);
  };
  const double partial = cumulative_[i] + integrate(f, knots_[i], z);
  return std::clamp(partial / total_, 0.0, 1.0);
}

double rejection_residual_sampler(double x1, double y1, double sd,
                                  ResidualSide side, Rng &rng, Integer cap) {
  if (!(sd > 0.0))
    throw DomainError("rejection_residual_sampler: sd must be positive");
  if (side != ResidualSide::Meet && x1 == y1)
    throw DomainError("rejection_residual_sampler: residual has zero mass");
  const double own = side == ResidualSide::YResidual ? y1 : x1;
  const double other = side == ResidualSide::YResidual ? x1 : y1;
  for (Integer k = 0; k < cap; ++k) {
    const double z = own + sd * rng.normal();
    // ratio = q_other(z) / q_own(z)
    const double dz_own = (z - own) / sd;
    const double dz_other = (z - other) / sd;
    const double ratio = std::exp(0.5 * (dz_own * dz_own - dz_other * dz_other));
    const double accept = side == ResidualSide::Meet ? std::min(1.0, ratio)
                                                     : std::max(0.0, 1.0 - ratio);
    if (rng.uniform() < accept)
      return z;
  }
  throw RejectionCapExceeded(cap);
}

} // namespace crwm
