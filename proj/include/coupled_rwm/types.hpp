#ifndef COUPLED_RWM_TYPES_HPP
#define COUPLED_RWM_TYPES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace crwm {

template <typename S> using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// A chain state, proposal, or increment in R^d.
using Point = Vec<double>;

using Integer = std::int64_t;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// x == y exactly, so the pair has no direction.
class DegeneratePair : public Error {
public:
  DegeneratePair() : Error("degenerate pair: x == y") {}
};

class DimensionMismatch : public Error {
public:
  DimensionMismatch(Integer a, Integer b)
      : Error("dimension mismatch: " + std::to_string(a) + " vs " +
              std::to_string(b)) {}
};

class DomainError : public Error {
public:
  using Error::Error;
};

class RejectionCapExceeded : public Error {
public:
  explicit RejectionCapExceeded(Integer cap)
      : Error("rejection loop exceeded cap of " + std::to_string(cap)) {}
};

class NonConvergence : public Error {
public:
  using Error::Error;
};

/// Exact coordinate-wise equality. Used for meeting detection.
template <typename A, typename B>
inline bool bitwise_equal(const Eigen::MatrixBase<A> &a,
                          const Eigen::MatrixBase<B> &b) {
  if (a.size() != b.size())
    return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a(i) != b(i))
      return false;
  return true;
}

inline void require_same_dim(Eigen::Index a, Eigen::Index b) {
  if (a != b)
    throw DimensionMismatch(a, b);
}

} // namespace crwm

#endif
