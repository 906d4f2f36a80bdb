#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "mtrob/errors.hpp"

namespace mtrob {

namespace detail {

// SplitMix64 finalizer. Used both as the generator step and for seed mixing.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Derives a child seed from a base seed and a list of coordinates
// (task count, grid index, trial index, ...). Splittable-counter style:
// extending one coordinate never changes streams at other coordinates.
inline std::uint64_t mix_seed(std::uint64_t seed,
                              std::initializer_list<std::uint64_t> fields) {
  std::uint64_t h = detail::splitmix64(seed);
  for (std::uint64_t f : fields) {
    h ^= detail::splitmix64(f + 0x9E3779B97F4A7C15ULL);
    h = detail::splitmix64(h);
  }
  return h;
}

// Deterministic pseudo-random stream. Self-contained (no <random>) so that
// identical seeds give identical streams on every platform and toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via the Marsaglia polar method; pairs are cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  // Fills row by row so the result does not depend on Eigen's storage order.
  void fill_normal(Eigen::Ref<Eigen::MatrixXd> m, double stddev = 1.0) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = stddev * normal();
  }

  Eigen::VectorXd normal_vector(Eigen::Index n, double stddev = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = stddev * normal();
    return v;
  }

  // Uniform on the unit sphere in R^d.
  Eigen::VectorXd unit_sphere(Eigen::Index d) {
    if (d < 1) throw ParameterError("unit_sphere: dimension must be >= 1");
    Eigen::VectorXd x(d);
    double norm = 0.0;
    do {
      for (Eigen::Index i = 0; i < d; ++i) x(i) = normal();
      norm = x.norm();
    } while (norm == 0.0);
    return x / norm;
  }

  // Fisher-Yates shuffle, deterministic given the stream position.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_u64() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mtrob
