#include <catch2/catch.hpp>

#include "mtrob/analysis.hpp"
#include "mtrob/ensemble.hpp"
#include "oracles.hpp"

using namespace mtrob;

namespace {

TaskMatrix diag_321_in_8x3() {
  Matrix m = Matrix::Zero(8, 3);
  m(0, 0) = 3.0;
  m(1, 1) = 2.0;
  m(2, 2) = 1.0;
  return TaskMatrix{m};
}

// The symmetric optimal rank-1 fit of two orthonormal tasks in R^3:
// W = (1,1,0)/sqrt(2), heads both 1/sqrt(2).
FactorizedModel symmetric_two_task_model() {
  Matrix w(1, 3);
  w << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  Matrix gamma(1, 2);
  gamma << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return FactorizedModel{w, gamma};
}

}  // namespace

TEST_CASE("noiseless_mse vanishes for a full-rank fit") {
  const TaskMatrix c{oracles::random_matrix(10, 4, 21)};
  // k = T fit, built directly from the decomposition (test-only regime).
  const FactorizedModel model = truncate_to_rank(svd(c), 4);
  const MseReport report = noiseless_mse(c, model);
  REQUIRE(report.average == Approx(0.0).margin(1e-12));
  for (Index i = 0; i < report.per_task.size(); ++i)
    REQUIRE(report.per_task(i) == Approx(0.0).margin(1e-12));
}

TEST_CASE("noiseless_mse of the symmetric two-task solution is 1/6") {
  const TaskMatrix c{Matrix::Identity(3, 3).leftCols(2)};
  const FactorizedModel model = symmetric_two_task_model();
  const MseReport report = noiseless_mse(c, model);
  REQUIRE(report.average == Approx(1.0 / 6.0).margin(1e-12));
  // Each reconstructed column has squared norm 1/2 and error 1/2.
  for (Index i = 0; i < 2; ++i) {
    REQUIRE(model.reconstruct().col(i).squaredNorm() ==
            Approx(0.5).margin(1e-12));
    REQUIRE(report.per_task(i) == Approx(0.5 / 3.0).margin(1e-12));
  }
}

TEST_CASE("noiseless_mse averages the residual over T*d") {
  const TaskMatrix c = diag_321_in_8x3();
  const FactorizedModel model = svd_solution(c, 2);
  const MseReport report = noiseless_mse(c, model);
  REQUIRE(report.average == Approx(1.0 / 24.0).margin(1e-12));
  REQUIRE(report.average ==
          Approx(report.per_task.mean()).margin(1e-12));
}

TEST_CASE("noiseless_mse rejects shape mismatches") {
  const TaskMatrix c = diag_321_in_8x3();
  const FactorizedModel model = svd_solution(TaskMatrix{oracles::random_matrix(6, 4, 22)}, 2);
  REQUIRE_THROWS_AS(noiseless_mse(c, model), DimensionError);
}

TEST_CASE("closed_form_noisy_mse at sigma 0 equals the noiseless report") {
  const TaskMatrix c = diag_321_in_8x3();
  const FactorizedModel model = svd_solution(c, 2);
  const MseReport noiseless = noiseless_mse(c, model);
  const MseReport noisy = closed_form_noisy_mse(c, model, 0.0);
  REQUIRE(noisy.average == noiseless.average);
  REQUIRE((noisy.per_task - noiseless.per_task).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("closed_form_noisy_mse adds the spectral slope") {
  const TaskMatrix c = diag_321_in_8x3();
  const FactorizedModel model = svd_solution(c, 2);
  // top-2 spectrum energy 9 + 4 = 13, T = 3.
  const MseReport report = closed_form_noisy_mse(c, model, 0.1);
  REQUIRE(report.average ==
          Approx(1.0 / 24.0 + (13.0 / 3.0) * 0.01).margin(1e-12));
}

TEST_CASE("per-task noise attribution sums to the trace term") {
  const TaskMatrix c{oracles::random_matrix(20, 6, 23)};
  const FactorizedModel model = svd_solution(c, 3);
  const double sigma = 0.7;
  const MseReport base = noiseless_mse(c, model);
  const MseReport noisy = closed_form_noisy_mse(c, model, sigma);
  const double added = (noisy.per_task - base.per_task).sum();
  REQUIRE(added ==
          Approx(sigma * sigma * model.gamma.squaredNorm()).margin(1e-10));
  for (Index i = 0; i < c.task_count(); ++i)
    REQUIRE(noisy.per_task(i) - base.per_task(i) ==
            Approx(sigma * sigma * model.head(i).squaredNorm()).margin(1e-12));
}

TEST_CASE("closed_form_noisy_mse insists on orthonormal rows") {
  const TaskMatrix c = diag_321_in_8x3();
  FactorizedModel model = svd_solution(c, 2);
  model.w *= 2.0;  // scaling must live in Gamma
  REQUIRE_THROWS_AS(closed_form_noisy_mse(c, model, 0.1), ContractError);
  REQUIRE_THROWS_AS(closed_form_noisy_mse(c, svd_solution(c, 2), -1.0),
                    ParameterError);
}

TEST_CASE("closed form is exactly affine in sigma squared") {
  const TaskMatrix c{oracles::random_matrix(16, 5, 24)};
  const FactorizedModel model = svd_solution(c, 2);
  const double s = 0.35;
  NoiseRobustnessProfile profile;
  for (double sigma : {0.0, s, 2.0 * s}) {
    NoiseProfileRow row;
    row.t = c.task_count();
    row.k = 2;
    row.sigma = sigma;
    row.mse_closed = closed_form_noisy_mse(c, model, sigma).average;
    row.slope = robustness_slope(c, 2);
    profile.push_back(row);
  }
  REQUIRE(profile_collinearity_defect(profile) < 1e-10);
  // The fitted slope is the robustness slope itself.
  const double slope_from_points =
      (profile[2].mse_closed - profile[0].mse_closed) / (4.0 * s * s);
  REQUIRE(slope_from_points == Approx(robustness_slope(c, 2)).margin(1e-10));
}

TEST_CASE("pointwise errors match the report averages") {
  const TaskMatrix c = diag_321_in_8x3();
  const FactorizedModel model = svd_solution(c, 2);
  Rng rng(30);
  // Average of pointwise errors over sphere samples estimates the per-task
  // noiseless MSE.
  const int n = 20000;
  Vector accumulated = Vector::Zero(3);
  for (int s = 0; s < n; ++s) {
    const Vector x = rng.unit_sphere(8);
    for (Index i = 0; i < 3; ++i)
      accumulated(i) +=
          pointwise_squared_error(c.task_vector(i), model.w, model.head(i), x);
  }
  accumulated /= static_cast<double>(n);
  const MseReport report = noiseless_mse(c, model);
  for (Index i = 0; i < 3; ++i)
    REQUIRE(accumulated(i) == Approx(report.per_task(i)).margin(5e-3));

  // At a specific point the value is just the squared prediction gap.
  const Vector e0 = Matrix::Identity(8, 8).col(0);
  const double direct =
      std::pow(c.task_vector(2).dot(e0) - model.head(2).dot(model.w * e0), 2);
  REQUIRE(pointwise_squared_error(c.task_vector(2), model.w, model.head(2),
                                  e0) == Approx(direct).margin(1e-15));
}

TEST_CASE("monte_carlo_mse agrees with the noiseless report at zero corruption") {
  const TaskMatrix c = diag_321_in_8x3();
  const FactorizedModel model = svd_solution(c, 2);
  const MseReport noiseless = noiseless_mse(c, model);

  const MseReport gauss0 = monte_carlo_mse(
      c, model, CorruptionSpec::additive_gaussian(0.0), 100000, 31);
  REQUIRE(std::abs(gauss0.average - noiseless.average) <=
          3.0 * gauss0.mc_std_error);

  const MseReport del0 = monte_carlo_mse(
      c, model, CorruptionSpec::random_deletion(0.0), 100000, 32);
  REQUIRE(std::abs(del0.average - noiseless.average) <= 3.0 * del0.mc_std_error);
}

TEST_CASE("monte_carlo_mse matches the closed form under additive noise") {
  const TaskMatrix c = diag_321_in_8x3();
  const FactorizedModel model = svd_solution(c, 2);
  const MseReport mc = monte_carlo_mse(
      c, model, CorruptionSpec::additive_gaussian(1.0), 100000, 33);
  REQUIRE(std::abs(mc.average - (1.0 / 24.0 + 13.0 / 3.0)) <=
          3.0 * mc.mc_std_error);
  REQUIRE(mc.mc_draws == 100000);
  REQUIRE(mc.mode == MseMode::monte_carlo);
}

TEST_CASE("monte_carlo_mse is deterministic and validates draws") {
  const TaskMatrix c{oracles::random_matrix(8, 4, 34)};
  const FactorizedModel model = svd_solution(c, 2);
  const CorruptionSpec spec = CorruptionSpec::additive_gaussian(0.5);
  const MseReport a = monte_carlo_mse(c, model, spec, 5000, 35);
  const MseReport b = monte_carlo_mse(c, model, spec, 5000, 35);
  REQUIRE(a.average == Approx(a.per_task.mean()).margin(1e-12));
  REQUIRE(a.average == b.average);
  REQUIRE(a.mc_std_error == b.mc_std_error);
  REQUIRE((a.per_task - b.per_task).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE_THROWS_AS(monte_carlo_mse(c, model, spec, 0, 35), ParameterError);
}

TEST_CASE("monte_carlo_mse supports deletion and pruning") {
  const TaskMatrix c{oracles::random_matrix(12, 5, 36)};
  const FactorizedModel model = svd_solution(c, 3);
  const MseReport deleted = monte_carlo_mse(
      c, model, CorruptionSpec::random_deletion(0.3), 20000, 37);
  const MseReport pruned = monte_carlo_mse(
      c, model, CorruptionSpec::magnitude_prune(0.3), 20000, 38);
  const double noiseless = noiseless_mse(c, model).average;
  // Destroying a third of the representation must hurt.
  REQUIRE(deleted.average > noiseless);
  REQUIRE(pruned.average > noiseless);
  REQUIRE(std::isfinite(deleted.mc_std_error));
  REQUIRE(std::isfinite(pruned.mc_std_error));
}

TEST_CASE("robustness_slope on the orthonormal toy tasks") {
  REQUIRE(robustness_slope(TaskMatrix{Matrix::Identity(3, 3).leftCols(2)}, 1) ==
          Approx(0.5).margin(1e-12));
  REQUIRE(robustness_slope(TaskMatrix{Matrix::Identity(3, 3)}, 1) ==
          Approx(1.0 / 3.0).margin(1e-12));
  REQUIRE(robustness_slope(diag_321_in_8x3(), 2) ==
          Approx(13.0 / 3.0).margin(1e-12));
}

TEST_CASE("aligned tasks yield a constant slope") {
  Rng rng(39);
  const Vector c = rng.unit_sphere(16);
  for (Index t : {2, 3, 5, 9, 16}) {
    TaskMatrix aligned{c * Matrix::Ones(1, t)};
    REQUIRE(robustness_slope(aligned, 1) == Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("robustness_slope validates k") {
  const TaskMatrix c = diag_321_in_8x3();
  REQUIRE_NOTHROW(robustness_slope(c, 3));  // k = min(d, T) allowed here
  REQUIRE_THROWS_AS(robustness_slope(c, 4), DimensionError);
  REQUIRE_THROWS_AS(robustness_slope(c, 0), ParameterError);
}

TEST_CASE("gamma_regularization_check returns matching quantities") {
  SECTION("symmetric two-task solution") {
    const TaskMatrix c{Matrix::Identity(3, 3).leftCols(2)};
    const HeadNormIdentity identity =
        gamma_regularization_check(symmetric_two_task_model(), c);
    REQUIRE(identity.gamma_frob_sq == Approx(1.0).margin(1e-12));
    REQUIRE(identity.top_k_sum == Approx(1.0).margin(1e-12));
  }
  SECTION("padded diagonal") {
    const TaskMatrix c = diag_321_in_8x3();
    const HeadNormIdentity identity =
        gamma_regularization_check(svd_solution(c, 2), c);
    REQUIRE(identity.gamma_frob_sq == Approx(13.0).margin(1e-10));
    REQUIRE(identity.top_k_sum == Approx(13.0).margin(1e-10));
  }
  SECTION("random matrix at k = 4") {
    const TaskMatrix c{oracles::random_matrix(24, 8, 40)};
    const HeadNormIdentity identity =
        gamma_regularization_check(svd_solution(c, 4), c);
    REQUIRE(identity.gamma_frob_sq ==
            Approx(identity.top_k_sum).margin(1e-10));
  }
}

TEST_CASE("crossover_sigma covers the three regimes") {
  SECTION("standard crossover") {
    const CrossoverReport report =
        crossover_sigma(AffineMse{0.1, 2.0}, AffineMse{0.2, 1.0});
    REQUIRE(report.sigma_thres.has_value());
    REQUIRE(*report.sigma_thres == Approx(std::sqrt(0.1)).margin(1e-12));
  }
  SECTION("equal slopes never cross") {
    const CrossoverReport report =
        crossover_sigma(AffineMse{0.1, 1.0}, AffineMse{0.2, 1.0});
    REQUIRE_FALSE(report.sigma_thres.has_value());
  }
  SECTION("larger model dominating from the start") {
    const CrossoverReport report =
        crossover_sigma(AffineMse{0.3, 2.0}, AffineMse{0.1, 1.0});
    REQUIRE(report.sigma_thres.has_value());
    REQUIRE(*report.sigma_thres == 0.0);
  }
  SECTION("negative inputs rejected") {
    REQUIRE_THROWS_AS(crossover_sigma(AffineMse{-0.1, 1.0}, AffineMse{0.0, 0.5}),
                      ParameterError);
  }
}

TEST_CASE("crossover ordering reverses around the threshold") {
  const AffineMse small{0.05, 3.0};
  const AffineMse large{0.2, 1.0};
  const CrossoverReport report = crossover_sigma(small, large);
  REQUIRE(report.sigma_thres.has_value());
  const double thres = *report.sigma_thres;
  REQUIRE(small.at(0.5 * thres) < large.at(0.5 * thres));
  REQUIRE(large.at(2.0 * thres) < small.at(2.0 * thres));
}

TEST_CASE("Gaussian ensemble crossover is confirmed by Monte Carlo curves") {
  // Four tasks fit at full rank vs five tasks at rank 4.
  const Index d = 1024;
  const TaskMatrix c5 =
      sample_gaussian_task_matrix(d, 5, 1.0 / static_cast<double>(d), 41);
  const TaskMatrix c4{c5.entries.leftCols(4)};

  const FactorizedModel model4 = truncate_to_rank(svd(c4), 4);
  const FactorizedModel model5 = svd_solution(c5, 4);

  const AffineMse profile4{noiseless_mse(c4, model4).average,
                           robustness_slope(c4, 4)};
  const AffineMse profile5{noiseless_mse(c5, model5).average,
                           robustness_slope(c5, 4)};
  const CrossoverReport report = crossover_sigma(profile4, profile5);
  REQUIRE(report.sigma_thres.has_value());
  REQUIRE(*report.sigma_thres > 0.0);
  const double thres = *report.sigma_thres;

  // Locate the empirical crossing of the two Monte Carlo curves by a linear
  // fit of their difference in sigma^2 (the difference is affine there).
  std::vector<double> u, diff;
  for (double factor : {0.6, 0.8, 1.0, 1.2, 1.4, 1.6}) {
    const double sigma = factor * thres;
    const MseReport mc4 = monte_carlo_mse(
        c4, model4, CorruptionSpec::additive_gaussian(sigma), 6000, 42);
    const MseReport mc5 = monte_carlo_mse(
        c5, model5, CorruptionSpec::additive_gaussian(sigma), 6000, 43);
    u.push_back(sigma * sigma);
    diff.push_back(mc4.average - mc5.average);
  }
  double su = 0, sy = 0, suu = 0, suy = 0;
  const double n = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    su += u[i];
    sy += diff[i];
    suu += u[i] * u[i];
    suy += u[i] * diff[i];
  }
  const double beta = (n * suy - su * sy) / (n * suu - su * su);
  const double alpha = (sy - beta * su) / n;
  REQUIRE(beta > 0.0);  // the few-task model degrades faster
  const double empirical_thres = std::sqrt(-alpha / beta);
  REQUIRE(empirical_thres == Approx(thres).epsilon(0.2));
}
