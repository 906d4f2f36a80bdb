#include <catch2/catch.hpp>

#include "mtrob/ensemble.hpp"
#include "oracles.hpp"

using namespace mtrob;

TEST_CASE("gaussian task matrices match the requested variance") {
  const Index d = 100;
  const TaskMatrix c =
      sample_gaussian_task_matrix(d, 100, 1.0 / static_cast<double>(d), 51);
  const double n = static_cast<double>(c.entries.size());
  const double mean = c.entries.sum() / n;
  const double var = c.entries.squaredNorm() / n - mean * mean;
  REQUIRE(var == Approx(1.0 / d).epsilon(0.05));
}

TEST_CASE("gaussian sampling is deterministic and validates variance") {
  const TaskMatrix a = sample_gaussian_task_matrix(10, 4, 0.5, 52);
  const TaskMatrix b = sample_gaussian_task_matrix(10, 4, 0.5, 52);
  REQUIRE((a.entries - b.entries).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE_THROWS_AS(sample_gaussian_task_matrix(10, 4, 0.0, 52), ParameterError);
  REQUIRE_THROWS_AS(sample_gaussian_task_matrix(10, 4, -1.0, 52),
                    ParameterError);
}

TEST_CASE("column streams are stable under task growth") {
  const TaskMatrix narrow = sample_gaussian_task_matrix(16, 3, 1.0, 53);
  const TaskMatrix wide = sample_gaussian_task_matrix(16, 7, 1.0, 53);
  REQUIRE((wide.entries.leftCols(3) - narrow.entries).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("interlacing holds with equality for orthonormal growth") {
  const TaskMatrix c{Matrix::Identity(3, 3).leftCols(2)};
  const Vector e3 = Matrix::Identity(3, 3).col(2);
  const InterlacingResult result = interlacing_check(c, e3);
  REQUIRE(result.ok);
  REQUIRE(result.max_violation <= 1e-12);
}

TEST_CASE("interlacing on a known appended spectrum") {
  Matrix m = Matrix::Zero(8, 2);
  m(0, 0) = 3.0;
  m(1, 1) = 2.0;
  Vector column = Vector::Zero(8);
  column(2) = 4.0;
  // New spectrum (4, 3, 2) interlaces the old (3, 2).
  const InterlacingResult result = interlacing_check(TaskMatrix{m}, column);
  REQUIRE(result.ok);
}

TEST_CASE("interlacing sweep finds no violations") {
  Rng rng(54);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const TaskMatrix c{oracles::random_matrix(32, 8, rng.next_u64())};
    Rng col_rng(rng.next_u64());
    const Vector column = col_rng.normal_vector(32);
    const InterlacingResult result = interlacing_check(c, column);
    REQUIRE(result.ok);
    worst = std::max(worst, result.max_violation);
  }
  REQUIRE(worst <= 1e-10);
}

TEST_CASE("interlacing_check validates the column length") {
  const TaskMatrix c{oracles::random_matrix(6, 3, 55)};
  REQUIRE_THROWS_AS(interlacing_check(c, Vector::Zero(5)), DimensionError);
}

TEST_CASE("spectral concentration bounds hold at alpha 0.2") {
  EnsembleConfig config;
  config.d = 1024;
  config.t_max = 8;
  config.k = 4;
  config.trials = 200;
  config.master_seed = 56;
  const SpectralBoundReport report = spectral_concentration_check(config, 8, 0.2);
  REQUIRE(report.violations == 0);
  REQUIRE(report.bound_max == Approx(1.0 + std::sqrt(8.0 / 1024.0) + 0.2));
  REQUIRE(report.bound_min == Approx(1.0 - std::sqrt(8.0 / 1024.0) - 0.2));
  REQUIRE(report.bound_probability == Approx(std::exp(-1024.0 * 0.04 / 2.0)));
  REQUIRE(report.empirical_sigma_max < report.bound_max);
  REQUIRE(report.empirical_sigma_min > report.bound_min);
}

TEST_CASE("alpha 0 is report-only and K = d evaluates the formula") {
  EnsembleConfig config;
  config.d = 64;
  config.t_max = 64;
  config.k = 2;
  config.trials = 20;
  config.master_seed = 57;
  const SpectralBoundReport loose = spectral_concentration_check(config, 8, 0.0);
  REQUIRE(loose.trials == 20);  // violations may occur; no assertion
  const SpectralBoundReport full = spectral_concentration_check(config, 64, 0.1);
  REQUIRE(full.bound_max == Approx(2.0 + 0.1));
}

TEST_CASE("task growth sweep sees decreasing slopes in regime") {
  EnsembleConfig config;
  config.d = 1024;
  config.t_max = 8;
  config.k = 4;
  config.trials = 30;
  config.master_seed = 58;
  const TaskGrowthSummary summary = task_growth_sweep(config, {0.0, 0.5, 1.0});
  REQUIRE(summary.frac_slope_decreasing >= 29.0 / 30.0);
  REQUIRE(summary.frac_ordered_at_max_sigma >= 29.0 / 30.0);
  REQUIRE(summary.prefix_monotonicity_violations == 0);
  REQUIRE(summary.trials.size() == 30);
  // Records span t = k+1 .. t_max with closed-form entries per sigma.
  const TaskGrowthTrial& trial = summary.trials.front();
  REQUIRE(trial.points.size() == 4);
  REQUIRE(trial.points.front().t == 5);
  REQUIRE(trial.points.back().t == 8);
  REQUIRE(trial.points.front().mse.size() == 3);
}

TEST_CASE("aligned ensembles defeat the ordering") {
  EnsembleConfig config;
  config.d = 64;
  config.t_max = 8;
  config.k = 2;
  config.trials = 5;
  config.master_seed = 59;
  const TaskGrowthSummary summary = task_growth_sweep(
      config, {0.0, 1.0}, [](Index d, Index t, std::uint64_t seed) {
        Rng rng(seed);
        const Vector c = rng.unit_sphere(d);
        return TaskMatrix{c * Matrix::Ones(1, t)};
      });
  REQUIRE(summary.frac_slope_decreasing == 0.0);
  REQUIRE(summary.frac_ordered_at_max_sigma == 0.0);
  for (const TaskGrowthTrial& trial : summary.trials)
    for (std::size_t i = 0; i + 1 < trial.points.size(); ++i)
      REQUIRE(trial.points[i].slope ==
              Approx(trial.points[i + 1].slope).margin(1e-10));
}

TEST_CASE("out-of-regime sweeps still report") {
  EnsembleConfig config;
  config.d = 16;
  config.t_max = 8;
  config.k = 4;
  config.trials = 10;
  config.master_seed = 60;
  const TaskGrowthSummary summary = task_growth_sweep(config, {0.0, 1.0});
  // d far below T^3: observed, not asserted.
  REQUIRE(summary.trials.size() == 10);
  REQUIRE(summary.frac_slope_decreasing >= 0.0);
}

TEST_CASE("sweep summaries are reproducible") {
  EnsembleConfig config;
  config.d = 128;
  config.t_max = 6;
  config.k = 3;
  config.trials = 8;
  config.master_seed = 61;
  const TaskGrowthSummary a = task_growth_sweep(config, {0.0, 0.5});
  const TaskGrowthSummary b = task_growth_sweep(config, {0.0, 0.5});
  REQUIRE(a.frac_slope_decreasing == b.frac_slope_decreasing);
  for (std::size_t i = 0; i < a.trials.size(); ++i)
    for (std::size_t j = 0; j < a.trials[i].points.size(); ++j)
      REQUIRE(a.trials[i].points[j].slope == b.trials[i].points[j].slope);
}

TEST_CASE("ensemble config validation") {
  EnsembleConfig config;
  config.d = 8;
  config.t_max = 9;  // d < t_max
  config.k = 2;
  REQUIRE_THROWS_AS(config.validate(), ParameterError);
  config.t_max = 8;
  config.k = 8;  // t_max == k
  REQUIRE_THROWS_AS(config.validate(), ParameterError);
  config.k = 2;
  config.trials = 0;
  REQUIRE_THROWS_AS(config.validate(), ParameterError);
  config.trials = 1;
  REQUIRE_NOTHROW(config.validate());
  REQUIRE(config.effective_variance() == Approx(1.0 / 8.0));
}
