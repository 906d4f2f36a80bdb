#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "mtrob/analysis.hpp"
#include "mtrob/errors.hpp"
#include "mtrob/linalg.hpp"
#include "mtrob/rng.hpp"
#include "mtrob/types.hpp"

namespace mtrob {

/// Gaussian task-ensemble parameters. Default entry variance 1/d keeps the
/// spectrum near [1 - sqrt(T/d), 1 + sqrt(T/d)].
struct EnsembleConfig {
  Index d = 0;
  Index t_max = 0;
  Index k = 0;
  int trials = 1;
  std::uint64_t master_seed = 0;
  double variance = 0.0;  // 0 means "use 1/d"

  double effective_variance() const {
    return variance > 0.0 ? variance : 1.0 / static_cast<double>(d);
  }
  void validate() const {
    if (!(d >= t_max && t_max > k && k >= 1))
      throw ParameterError(
          "EnsembleConfig: requires d >= t_max > k >= 1 (d = " +
          std::to_string(d) + ", t_max = " + std::to_string(t_max) +
          ", k = " + std::to_string(k) + ")");
    if (trials < 1) throw ParameterError("EnsembleConfig: trials must be >= 1");
    if (variance < 0.0)
      throw ParameterError(
          "EnsembleConfig: variance must be >= 0 (0 selects 1/d)");
  }
};

/// d x T matrix with i.i.d. N(0, variance) entries.
inline TaskMatrix sample_gaussian_task_matrix(Index d, Index t, double variance,
                                              std::uint64_t seed) {
  if (variance <= 0.0)
    throw ParameterError("sample_gaussian_task_matrix: variance must be > 0");
  if (d < 1 || t < 1)
    throw DimensionError("sample_gaussian_task_matrix: d and T must be >= 1");
  TaskMatrix c;
  c.entries.resize(d, t);
  const double stddev = std::sqrt(variance);
  // Column-wise streams: extending T appends columns without perturbing
  // the existing ones.
  for (Index j = 0; j < t; ++j) {
    Rng rng(mix_seed(seed, {static_cast<std::uint64_t>(j)}));
    for (Index i = 0; i < d; ++i) c.entries(i, j) = stddev * rng.normal();
  }
  return c;
}

struct InterlacingResult {
  bool ok = true;
  double max_violation = 0.0;  // worst slack past tolerance-free inequality
};

/// Appending a column must shift every singular value between its old
/// neighbors: sigma_{i+1}(C_new) <= sigma_i(C) <= sigma_i(C_new).
/// Violations are measured as positive slack; `ok` applies the tolerance.
inline InterlacingResult interlacing_check(const TaskMatrix& c,
                                           const Vector& new_column,
                                           double tol = 1e-10) {
  if (new_column.size() != c.dim())
    throw DimensionError("interlacing_check: column length " +
                         std::to_string(new_column.size()) +
                         " does not match d = " + std::to_string(c.dim()));
  TaskMatrix grown;
  grown.entries.resize(c.dim(), c.task_count() + 1);
  grown.entries.leftCols(c.task_count()) = c.entries;
  grown.entries.col(c.task_count()) = new_column;

  const Vector s_old = svd(c).singular_values;
  const Vector s_new = svd(grown).singular_values;

  InterlacingResult result;
  for (Index i = 0; i < s_old.size(); ++i) {
    if (i < s_new.size())
      result.max_violation =
          std::max(result.max_violation, s_old(i) - s_new(i));
    if (i + 1 < s_new.size())
      result.max_violation =
          std::max(result.max_violation, s_new(i + 1) - s_old(i));
  }
  result.ok = result.max_violation <= tol;
  return result;
}

/// Empirical check of the spectral concentration bounds for K-column
/// Gaussian prefixes: sigma_max <= 1 + sqrt(K/d) + alpha and
/// sigma_min >= 1 - sqrt(K/d) - alpha, each failing with probability at
/// most exp(-d alpha^2 / 2).
struct SpectralBoundReport {
  Index k_columns = 0;
  double empirical_sigma_max = 0.0;
  double empirical_sigma_min = 0.0;
  double bound_max = 0.0;
  double bound_min = 0.0;
  double alpha = 0.0;
  int violations = 0;
  int trials = 0;
  double bound_probability = 0.0;  // exp(-d alpha^2 / 2)
};

inline SpectralBoundReport spectral_concentration_check(
    const EnsembleConfig& config, Index k_columns, double alpha) {
  config.validate();
  if (k_columns < 1 || k_columns > config.t_max)
    throw ParameterError("spectral_concentration_check: K must be in [1, t_max]");
  if (alpha < 0.0)
    throw ParameterError("spectral_concentration_check: alpha must be >= 0");

  const double d = static_cast<double>(config.d);
  SpectralBoundReport report;
  report.k_columns = k_columns;
  report.alpha = alpha;
  report.bound_max = 1.0 + std::sqrt(static_cast<double>(k_columns) / d) + alpha;
  report.bound_min = 1.0 - std::sqrt(static_cast<double>(k_columns) / d) - alpha;
  report.trials = config.trials;
  report.bound_probability = std::exp(-d * alpha * alpha / 2.0);
  report.empirical_sigma_max = -1.0;
  report.empirical_sigma_min = std::numeric_limits<double>::infinity();

  for (int trial = 0; trial < config.trials; ++trial) {
    const TaskMatrix c = sample_gaussian_task_matrix(
        config.d, k_columns, config.effective_variance(),
        mix_seed(config.master_seed, {static_cast<std::uint64_t>(trial)}));
    const Vector s = svd(c).singular_values;
    const double s_max = s(0);
    const double s_min = s(s.size() - 1);
    report.empirical_sigma_max = std::max(report.empirical_sigma_max, s_max);
    report.empirical_sigma_min = std::min(report.empirical_sigma_min, s_min);
    if (s_max > report.bound_max || s_min < report.bound_min)
      ++report.violations;
  }
  return report;
}

/// Closed-form profile of one prefix size within a growth sweep.
struct TaskGrowthPoint {
  Index t = 0;
  double slope = 0.0;      // R(t)
  double intercept = 0.0;  // noiseless average MSE
  std::vector<double> mse; // closed-form MSE at each grid sigma
};

struct TaskGrowthTrial {
  std::vector<TaskGrowthPoint> points;  // t = k+1 .. t_max
  bool slope_strictly_decreasing = false;
  bool ordered_at_max_sigma = false;       // MSE_{t+1} < MSE_t at largest sigma
  bool ordered_at_twice_crossover = false; // same check at 2 * sigma_thres per pair
  int prefix_monotonicity_violations = 0;  // top-k sum must grow with t
};

struct TaskGrowthSummary {
  std::vector<TaskGrowthTrial> trials;
  double frac_slope_decreasing = 0.0;
  double frac_ordered_at_max_sigma = 0.0;
  double frac_ordered_at_twice_crossover = 0.0;
  int prefix_monotonicity_violations = 0;
};

using TaskMatrixSampler =
    std::function<TaskMatrix(Index d, Index t, std::uint64_t seed)>;

/// For each trial, samples C (d x t_max) and walks nested prefix-column
/// submatrices C_t for t = k+1 .. t_max, recording the robustness slope and
/// the closed-form MSE at each grid sigma. Per-trial seeds derive from the
/// master seed, so execution order cannot change the aggregate. A custom
/// sampler may replace the Gaussian ensemble (e.g. aligned-task controls).
inline TaskGrowthSummary task_growth_sweep(const EnsembleConfig& config,
                                           const std::vector<double>& sigma_grid,
                                           const TaskMatrixSampler& sampler = {}) {
  config.validate();
  if (sigma_grid.empty())
    throw ParameterError("task_growth_sweep: sigma grid must be nonempty");
  for (double s : sigma_grid)
    if (s < 0.0)
      throw ParameterError("task_growth_sweep: sigmas must be nonnegative");

  TaskGrowthSummary summary;
  summary.trials.reserve(static_cast<std::size_t>(config.trials));
  const double var = config.effective_variance();
  int n_slope = 0, n_max_sigma = 0, n_crossover = 0;

  for (int trial = 0; trial < config.trials; ++trial) {
    const std::uint64_t trial_seed =
        mix_seed(config.master_seed, {static_cast<std::uint64_t>(trial)});
    const TaskMatrix c = sampler
                             ? sampler(config.d, config.t_max, trial_seed)
                             : sample_gaussian_task_matrix(config.d, config.t_max,
                                                           var, trial_seed);
    TaskGrowthTrial record;
    for (Index t = config.k + 1; t <= config.t_max; ++t) {
      TaskMatrix prefix{c.entries.leftCols(t)};
      const Vector s = svd(prefix).singular_values;
      TaskGrowthPoint point;
      point.t = t;
      double top = 0.0, tail = 0.0;
      for (Index i = 0; i < s.size(); ++i) {
        if (i < config.k)
          top += s(i) * s(i);
        else
          tail += s(i) * s(i);
      }
      point.slope = top / static_cast<double>(t);
      point.intercept =
          tail / (static_cast<double>(t) * static_cast<double>(config.d));
      point.mse.reserve(sigma_grid.size());
      for (double sg : sigma_grid)
        point.mse.push_back(point.intercept + point.slope * sg * sg);
      record.points.push_back(std::move(point));
    }

    record.slope_strictly_decreasing = true;
    record.ordered_at_max_sigma = true;
    record.ordered_at_twice_crossover = true;
    const double sigma_top = *std::max_element(sigma_grid.begin(), sigma_grid.end());
    for (std::size_t i = 0; i + 1 < record.points.size(); ++i) {
      const TaskGrowthPoint& a = record.points[i];
      const TaskGrowthPoint& b = record.points[i + 1];
      if (!(b.slope < a.slope)) record.slope_strictly_decreasing = false;

      const double top_a = a.slope * static_cast<double>(a.t);
      const double top_b = b.slope * static_cast<double>(b.t);
      if (top_b < top_a - 1e-10 * std::max(1.0, top_a))
        ++record.prefix_monotonicity_violations;

      const AffineMse small{a.intercept, a.slope};
      const AffineMse large{b.intercept, b.slope};
      if (!(large.at(sigma_top) < small.at(sigma_top)))
        record.ordered_at_max_sigma = false;
      const CrossoverReport cross = crossover_sigma(small, large);
      if (!cross.sigma_thres.has_value()) {
        record.ordered_at_twice_crossover = false;
      } else {
        const double probe = 2.0 * *cross.sigma_thres;
        if (!(large.at(probe) < small.at(probe)))
          record.ordered_at_twice_crossover = false;
      }
    }
    n_slope += record.slope_strictly_decreasing ? 1 : 0;
    n_max_sigma += record.ordered_at_max_sigma ? 1 : 0;
    n_crossover += record.ordered_at_twice_crossover ? 1 : 0;
    summary.prefix_monotonicity_violations += record.prefix_monotonicity_violations;
    summary.trials.push_back(std::move(record));
  }

  const double n = static_cast<double>(config.trials);
  summary.frac_slope_decreasing = n_slope / n;
  summary.frac_ordered_at_max_sigma = n_max_sigma / n;
  summary.frac_ordered_at_twice_crossover = n_crossover / n;
  return summary;
}

}  // namespace mtrob
