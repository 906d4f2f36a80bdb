#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "mtrob/corruption.hpp"
#include "mtrob/errors.hpp"
#include "mtrob/linalg.hpp"
#include "mtrob/rng.hpp"
#include "mtrob/types.hpp"

namespace mtrob {

enum class MseMode { closed_form, monte_carlo };

/// Per-task and average mean squared error of a factorized model against the
/// task matrix, evaluated over inputs uniform on the unit sphere.
struct MseReport {
  Vector per_task;                // MSE^i, length T
  double average = 0.0;           // mean of per_task
  double sigma = 0.0;             // corruption std-dev (0 for noiseless)
  MseMode mode = MseMode::closed_form;
  std::int64_t mc_draws = 0;      // monte-carlo only
  double mc_std_error = 0.0;      // standard error of `average` (monte-carlo)
};

namespace detail {

inline void require_compatible(const TaskMatrix& c, const FactorizedModel& m,
                               const char* what) {
  if (m.dim() != c.dim() || m.task_count() != c.task_count())
    throw DimensionError(std::string(what) + ": model shape (" +
                         std::to_string(m.k()) + "x" + std::to_string(m.dim()) +
                         ", T=" + std::to_string(m.task_count()) +
                         ") does not match task matrix " +
                         std::to_string(c.dim()) + "x" +
                         std::to_string(c.task_count()));
}

}  // namespace detail

/// MSE^i = ||c_i - W^T gamma_i||^2 / d: the expectation of
/// (c_i^T x - gamma_i^T W x)^2 over x uniform on the unit sphere.
inline MseReport noiseless_mse(const TaskMatrix& c, const FactorizedModel& model) {
  detail::require_compatible(c, model, "noiseless_mse");
  const Index t = c.task_count();
  const double d = static_cast<double>(c.dim());
  const Matrix residual = c.entries - model.reconstruct();
  MseReport report;
  report.per_task = residual.colwise().squaredNorm().transpose() / d;
  report.average = report.per_task.sum() / static_cast<double>(t);
  return report;
}

/// Squared error of a (possibly corrupted) linear model at one input point.
inline double pointwise_squared_error(const Vector& task_vector,
                                      const Matrix& w_corrupted,
                                      const Vector& head, const Vector& x) {
  const double diff = task_vector.dot(x) - head.dot(w_corrupted * x);
  return diff * diff;
}

/// Noisy-MSE law for additive Gaussian weight noise: each task pays
/// sigma^2 ||gamma_i||^2 on top of its noiseless error, so the average is
/// affine in sigma^2 with slope ||Gamma||_F^2 / T. Requires orthonormal
/// rows in W (otherwise the effective noise scale is distorted).
inline MseReport closed_form_noisy_mse(const TaskMatrix& c,
                                       const FactorizedModel& model,
                                       double sigma) {
  if (sigma < 0.0)
    throw ParameterError("closed_form_noisy_mse: sigma must be >= 0");
  detail::require_compatible(c, model, "closed_form_noisy_mse");
  require_orthonormal_rows(model.w, "closed_form_noisy_mse");
  MseReport report = noiseless_mse(c, model);
  const double s2 = sigma * sigma;
  report.per_task += s2 * model.gamma.colwise().squaredNorm().transpose();
  report.average = report.per_task.sum() / static_cast<double>(c.task_count());
  report.sigma = sigma;
  return report;
}

/// Simulates the corruption process directly: per draw, corrupt W, sample x
/// on the unit sphere, accumulate per-task squared errors. Draws are grouped
/// into fixed-size blocks with seeds derived from (seed, block, draw), so the
/// result is a pure function of the inputs regardless of scheduling.
/// Supports all three corruption kinds.
inline MseReport monte_carlo_mse(const TaskMatrix& c,
                                 const FactorizedModel& model,
                                 const CorruptionSpec& corruption,
                                 std::int64_t draws, std::uint64_t seed) {
  if (draws < 1)
    throw ParameterError("monte_carlo_mse: draws must be >= 1");
  detail::require_compatible(c, model, "monte_carlo_mse");

  constexpr std::int64_t kBlock = 4096;
  const Index t = c.task_count();
  const Index d = c.dim();

  // Magnitude pruning is deterministic, so the corrupted matrix is shared
  // across draws.
  const bool static_corruption =
      corruption.kind == CorruptionKind::magnitude_prune;
  Matrix w_static;
  if (static_corruption) w_static = apply_corruption(model.w, corruption, 0);

  Vector per_task_sum = Vector::Zero(t);
  double avg_sum = 0.0, avg_sq_sum = 0.0;
  Vector errors(t);

  const std::int64_t blocks = (draws + kBlock - 1) / kBlock;
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::uint64_t block_seed = mix_seed(seed, {static_cast<std::uint64_t>(b)});
    const std::int64_t lo = b * kBlock;
    const std::int64_t hi = std::min(draws, lo + kBlock);
    Vector block_task_sum = Vector::Zero(t);
    double block_avg = 0.0, block_avg_sq = 0.0;
    Matrix w_draw;
    for (std::int64_t j = lo; j < hi; ++j) {
      const std::uint64_t draw_seed =
          mix_seed(block_seed, {static_cast<std::uint64_t>(j - lo)});
      if (!static_corruption)
        w_draw = apply_corruption(model.w, corruption, mix_seed(draw_seed, {1}));
      const Matrix& w_c = static_corruption ? w_static : w_draw;
      Rng x_rng(mix_seed(draw_seed, {2}));
      const Vector x = x_rng.unit_sphere(d);
      const Vector wx = w_c * x;
      const Vector predictions = model.gamma.transpose() * wx;
      const Vector truth = c.entries.transpose() * x;
      errors = (truth - predictions).array().square();
      block_task_sum += errors;
      const double e_avg = errors.sum() / static_cast<double>(t);
      block_avg += e_avg;
      block_avg_sq += e_avg * e_avg;
    }
    per_task_sum += block_task_sum;
    avg_sum += block_avg;
    avg_sq_sum += block_avg_sq;
  }

  const double n = static_cast<double>(draws);
  MseReport report;
  report.per_task = per_task_sum / n;
  report.average = avg_sum / n;
  report.sigma = corruption.kind == CorruptionKind::additive_gaussian
                     ? corruption.sigma
                     : 0.0;
  report.mode = MseMode::monte_carlo;
  report.mc_draws = draws;
  const double var = std::max(0.0, (avg_sq_sum / n - report.average * report.average) *
                                       (n / std::max(1.0, n - 1.0)));
  report.mc_std_error = std::sqrt(var / n);
  return report;
}

/// R(T) = sum of the top-k squared singular values of C divided by T: the
/// coefficient of sigma^2 in the average noisy MSE. Smaller slope means the
/// model degrades more slowly as weight noise grows.
inline double robustness_slope(const TaskMatrix& c, Index k) {
  if (k < 1) throw ParameterError("robustness_slope: k must be >= 1");
  if (k > std::min(c.dim(), c.task_count()))
    throw DimensionError("robustness_slope: k exceeds min(d, T)");
  const SvdResult dec = svd(c);
  double top = 0.0;
  for (Index i = 0; i < k; ++i)
    top += dec.singular_values(i) * dec.singular_values(i);
  return top / static_cast<double>(c.task_count());
}

/// Both sides of the head-norm identity ||Gamma||_F^2 = sum of the top-k
/// squared singular values of C. Callers assert equality.
struct HeadNormIdentity {
  double gamma_frob_sq = 0.0;
  double top_k_sum = 0.0;
};

inline HeadNormIdentity gamma_regularization_check(const FactorizedModel& model,
                                                   const TaskMatrix& c) {
  detail::require_compatible(c, model, "gamma_regularization_check");
  const SvdResult dec = svd(c);
  HeadNormIdentity out;
  out.gamma_frob_sq = model.gamma.squaredNorm();
  const Index k = std::min<Index>(model.k(), dec.singular_values.size());
  for (Index i = 0; i < k; ++i)
    out.top_k_sum += dec.singular_values(i) * dec.singular_values(i);
  return out;
}

/// Affine MSE-vs-sigma^2 profile of one model: mse(sigma) = intercept +
/// slope * sigma^2.
struct AffineMse {
  double intercept = 0.0;
  double slope = 0.0;
  double at(double sigma) const { return intercept + slope * sigma * sigma; }
};

/// Noise threshold past which the model with more tasks (smaller slope)
/// stays strictly below the one with fewer tasks.
struct CrossoverReport {
  std::optional<double> sigma_thres;
  double intercept_small = 0.0, intercept_large = 0.0;
  double slope_small = 0.0, slope_large = 0.0;
};

/// `small` is the fewer-task profile, `large` the more-task profile.
/// No crossover exists unless slope_small > slope_large; when the more-task
/// model already starts lower, the threshold is 0 (dominates everywhere).
inline CrossoverReport crossover_sigma(const AffineMse& small,
                                       const AffineMse& large) {
  if (small.intercept < 0.0 || large.intercept < 0.0 || small.slope < 0.0 ||
      large.slope < 0.0)
    throw ParameterError("crossover_sigma: intercepts and slopes must be >= 0");
  CrossoverReport report;
  report.intercept_small = small.intercept;
  report.intercept_large = large.intercept;
  report.slope_small = small.slope;
  report.slope_large = large.slope;
  if (small.slope <= large.slope) return report;  // no crossover
  if (large.intercept < small.intercept) {
    report.sigma_thres = 0.0;
    return report;
  }
  report.sigma_thres = std::sqrt((large.intercept - small.intercept) /
                                 (small.slope - large.slope));
  return report;
}

/// One row of a noise-robustness profile.
struct NoiseProfileRow {
  Index t = 0;
  Index k = 0;
  double sigma = 0.0;
  double mse_closed = 0.0;
  double mse_mc = 0.0;
  double slope = 0.0;
};

using NoiseRobustnessProfile = std::vector<NoiseProfileRow>;

/// Worst absolute deviation of (sigma^2, mse_closed) rows from the affine
/// law through their least-squares line. Zero (to rounding) for any
/// profile produced by closed_form_noisy_mse.
inline double profile_collinearity_defect(const NoiseRobustnessProfile& rows) {
  if (rows.size() < 3) return 0.0;
  double su = 0, sy = 0, suu = 0, suy = 0;
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    const double u = r.sigma * r.sigma;
    su += u;
    sy += r.mse_closed;
    suu += u * u;
    suy += u * r.mse_closed;
  }
  const double denom = n * suu - su * su;
  if (denom == 0.0) return 0.0;
  const double slope = (n * suy - su * sy) / denom;
  const double intercept = (sy - slope * su) / n;
  double worst = 0.0;
  for (const auto& r : rows)
    worst = std::max(worst, std::abs(intercept + slope * r.sigma * r.sigma -
                                     r.mse_closed));
  return worst;
}

}  // namespace mtrob
