#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace radarest {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Derives an independent substream seed from a master seed and a list of
/// integer labels. Mixing is order sensitive, so (trial, path) and
/// (path, trial) give unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> labels) {
  std::uint64_t s = splitmix64(master ^ 0x8f1bbcdcbfa53e0bull);
  for (std::uint64_t v : labels) s = splitmix64(s ^ splitmix64(v + 0x2545f4914f6cdd1dull));
  return s;
}

/// mt19937_64 with a hand-rolled Box-Muller transform. std::normal_distribution
/// is implementation defined; this keeps streams reproducible across builds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  /// Uniform in (0, 1).
  double uniform() { return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  /// Circularly symmetric CN(0, 1): real and imaginary parts N(0, 1/2).
  std::complex<double> cnormal() {
    const double r = std::sqrt(-std::log(uniform()));
    const double t = 2.0 * std::numbers::pi * uniform();
    return {r * std::cos(t), r * std::sin(t)};
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Draws x ~ CN(0, A) given any factor S with S S^H = A.
inline Eigen::VectorXcd sample_cn(Rng& rng, const Eigen::MatrixXcd& factor) {
  Eigen::VectorXcd z(factor.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.cnormal();
  return factor * z;
}

}  // namespace radarest
