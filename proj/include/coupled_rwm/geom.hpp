#ifndef COUPLED_RWM_GEOM_HPP
#define COUPLED_RWM_GEOM_HPP

#include <cmath>
#include <utility>

#include "coupled_rwm/types.hpp"

namespace crwm {

/**
 * Decomposition of a state pair (x, y) along the unit direction e = (y - x)/r.
 *
 * x = m - (r/2) e and y = m + (r/2) e, with m = m1 e + m_perp and
 * e . m_perp = 0.
 */
template <typename S> struct PairGeometry {
  S r;
  Vec<S> e;
  Vec<S> m;
  S m1;
  Vec<S> m_perp;

  Eigen::Index dim() const { return e.size(); }
};

/// Splits z into its e-component and the orthogonal remainder.
template <typename DerivedZ, typename DerivedE>
std::pair<typename DerivedZ::Scalar, Vec<typename DerivedZ::Scalar>>
project(const Eigen::MatrixBase<DerivedZ> &z,
        const Eigen::MatrixBase<DerivedE> &e) {
  require_same_dim(z.size(), e.size());
  const auto z1 = e.dot(z);
  Vec<typename DerivedZ::Scalar> z_perp = z - e * z1;
  return {z1, std::move(z_perp)};
}

/// Householder reflection across the hyperplane orthogonal to e.
template <typename DerivedZ, typename DerivedE>
Vec<typename DerivedZ::Scalar> reflect(const Eigen::MatrixBase<DerivedZ> &xi,
                                       const Eigen::MatrixBase<DerivedE> &e) {
  require_same_dim(xi.size(), e.size());
  return xi - 2 * e * e.dot(xi);
}

/// Throws DegeneratePair when x == y exactly; callers handle the sticky case.
template <typename DerivedX, typename DerivedY>
PairGeometry<typename DerivedX::Scalar>
pair_geometry(const Eigen::MatrixBase<DerivedX> &x,
              const Eigen::MatrixBase<DerivedY> &y) {
  using S = typename DerivedX::Scalar;
  require_same_dim(x.size(), y.size());
  if (bitwise_equal(x, y))
    throw DegeneratePair();
  Vec<S> diff = y - x;
  const S r = diff.norm();
  PairGeometry<S> g;
  g.r = r;
  g.e = diff / r;
  g.m = (x + y) / S(2);
  auto [m1, m_perp] = project(g.m, g.e);
  g.m1 = m1;
  g.m_perp = std::move(m_perp);
  return g;
}

} // namespace crwm

#endif
