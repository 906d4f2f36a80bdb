#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mtrob/errors.hpp"
#include "mtrob/rng.hpp"
#include "mtrob/types.hpp"

namespace mtrob {

enum class CorruptionKind { additive_gaussian, random_deletion, magnitude_prune };

inline const char* to_string(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::additive_gaussian: return "additive-gaussian";
    case CorruptionKind::random_deletion: return "random-deletion";
    case CorruptionKind::magnitude_prune: return "magnitude-prune";
  }
  return "?";
}

inline CorruptionKind corruption_kind_from_string(const std::string& s) {
  if (s == "additive-gaussian") return CorruptionKind::additive_gaussian;
  if (s == "random-deletion") return CorruptionKind::random_deletion;
  if (s == "magnitude-prune") return CorruptionKind::magnitude_prune;
  throw ParameterError("unknown corruption kind '" + s +
                       "' (expected additive-gaussian, random-deletion or "
                       "magnitude-prune)");
}

/// One structural-failure operator with its parameter. `sigma` pairs only
/// with additive-gaussian, `p` only with the other two kinds.
struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::additive_gaussian;
  double sigma = 0.0;  // noise std-dev
  double p = 0.0;      // deletion probability / pruned fraction
  std::uint64_t seed = 0;

  static CorruptionSpec additive_gaussian(double sigma, std::uint64_t seed = 0) {
    if (sigma < 0.0)
      throw ParameterError("additive-gaussian: sigma must be >= 0");
    return {CorruptionKind::additive_gaussian, sigma, 0.0, seed};
  }
  static CorruptionSpec random_deletion(double p, std::uint64_t seed = 0) {
    if (p < 0.0 || p > 1.0)
      throw ParameterError("random-deletion: p must be in [0, 1]");
    return {CorruptionKind::random_deletion, 0.0, p, seed};
  }
  static CorruptionSpec magnitude_prune(double p) {
    if (p < 0.0 || p > 1.0)
      throw ParameterError("magnitude-prune: p must be in [0, 1]");
    return {CorruptionKind::magnitude_prune, 0.0, p, 0};
  }
};

/// W + N with N_ij i.i.d. zero-mean Gaussian of variance sigma^2.
inline Matrix apply_additive_noise(const Matrix& w, double sigma,
                                   std::uint64_t seed) {
  if (sigma < 0.0)
    throw ParameterError("apply_additive_noise: sigma must be >= 0");
  Matrix out = w;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) += sigma * rng.normal();
  return out;
}

/// Zeroes each entry independently with probability p.
inline Matrix apply_random_deletion(const Matrix& w, double p,
                                    std::uint64_t seed) {
  if (p < 0.0 || p > 1.0)
    throw ParameterError("apply_random_deletion: p must be in [0, 1]");
  Matrix out = w;
  if (p == 0.0) return out;
  Rng rng(seed);
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j)
      if (rng.uniform() < p) out(i, j) = 0.0;
  return out;
}

/// Zeroes the floor(p * entry-count) entries of smallest magnitude.
/// Magnitude ties break toward the lower flattened row-major index, so the
/// pruning pattern is identical across implementations.
inline Matrix apply_magnitude_pruning(const Matrix& w, double p) {
  if (p < 0.0 || p > 1.0)
    throw ParameterError("apply_magnitude_pruning: p must be in [0, 1]");
  Matrix out = w;
  const std::size_t n = static_cast<std::size_t>(out.size());
  const std::size_t prune = static_cast<std::size_t>(
      std::floor(p * static_cast<double>(n)));
  if (prune == 0) return out;

  const Index cols = out.cols();
  std::vector<std::size_t> order(n);  // flattened row-major indices
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto magnitude = [&](std::size_t flat) {
    return std::abs(out(static_cast<Index>(flat / cols),
                        static_cast<Index>(flat % cols)));
  };
  std::partial_sort(order.begin(), order.begin() + prune, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double ma = magnitude(a), mb = magnitude(b);
                      if (ma != mb) return ma < mb;
                      return a < b;
                    });
  for (std::size_t idx = 0; idx < prune; ++idx) {
    const std::size_t flat = order[idx];
    out(static_cast<Index>(flat / cols), static_cast<Index>(flat % cols)) = 0.0;
  }
  return out;
}

/// Dispatches on the corruption kind; `seed` overrides spec.seed when the
/// caller manages per-draw streams itself.
inline Matrix apply_corruption(const Matrix& w, const CorruptionSpec& spec,
                               std::uint64_t seed) {
  switch (spec.kind) {
    case CorruptionKind::additive_gaussian:
      return apply_additive_noise(w, spec.sigma, seed);
    case CorruptionKind::random_deletion:
      return apply_random_deletion(w, spec.p, seed);
    case CorruptionKind::magnitude_prune:
      return apply_magnitude_pruning(w, spec.p);
  }
  throw ParameterError("apply_corruption: unknown kind");
}

inline Matrix apply_corruption(const Matrix& w, const CorruptionSpec& spec) {
  return apply_corruption(w, spec, spec.seed);
}

}  // namespace mtrob
