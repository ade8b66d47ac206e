#ifndef COUPLED_RWM_RNG_HPP
#define COUPLED_RWM_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

#include "coupled_rwm/types.hpp"

namespace crwm {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Folds a list of words into one seed. Order matters.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (auto w : words)
    h = mix64(h ^ mix64(w));
  return h;
}

/// One random stream. Not shared across threads.
class Rng {
public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }

  Point normal(Eigen::Index d, double sd) {
    Point z(d);
    for (Eigen::Index i = 0; i < d; ++i)
      z(i) = sd * normal_(engine_);
    return z;
  }

  engine_type &engine() { return engine_; }

private:
  engine_type engine_;
  std::normal_distribution<double> normal_;
};

} // namespace crwm

#endif
