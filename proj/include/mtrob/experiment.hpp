#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtrob/analysis.hpp"
#include "mtrob/csvio.hpp"
#include "mtrob/ensemble.hpp"
#include "mtrob/errors.hpp"
#include "mtrob/idx.hpp"
#include "mtrob/learning.hpp"
#include "mtrob/linalg.hpp"
#include "mtrob/rng.hpp"
#include "mtrob/types.hpp"

namespace mtrob {

// ---------------------------------------------------------------------------
// sweep: synthetic Gaussian ensembles, nested prefix tasks, MSE-vs-noise rows.

struct SweepConfig {
  std::string experiment_id = "sweep";
  Index d = 256;
  Index k = 4;
  Index t_min = 5;
  Index t_max = 10;
  std::vector<double> levels = {0.0, 0.25, 0.5, 1.0};  // sigma (or p) grid
  int trials = 5;
  std::uint64_t master_seed = 1;
  CorruptionKind corruption = CorruptionKind::additive_gaussian;
  double variance = 0.0;  // entry variance; 0 selects 1/d
  std::int64_t mc_draws = 10000;
  std::filesystem::path out = "sweep.csv";

  static SweepConfig from_map(const ConfigMap& map) {
    ConfigReader reader(map);
    SweepConfig cfg;
    cfg.experiment_id = reader.get_string("experiment_id", cfg.experiment_id);
    cfg.d = reader.get_int("d", cfg.d);
    cfg.k = reader.get_int("k", cfg.k);
    cfg.t_min = reader.get_int("t_min", cfg.t_min);
    cfg.t_max = reader.get_int("t_max", cfg.t_max);
    cfg.levels = reader.get_real_list("sigmas", cfg.levels);
    cfg.trials = static_cast<int>(reader.get_int("trials", cfg.trials));
    cfg.master_seed = reader.get_u64("master_seed", cfg.master_seed);
    cfg.corruption = corruption_kind_from_string(
        reader.get_string("corruption", to_string(cfg.corruption)));
    cfg.variance = reader.get_real("variance", cfg.variance);
    cfg.mc_draws = reader.get_int("mc_draws", cfg.mc_draws);
    cfg.out = reader.get_string("out", cfg.out.string());
    reader.reject_unknown_keys();
    cfg.validate();
    return cfg;
  }

  void validate() const {
    if (k < 1) throw ParameterError("config key 'k': must be >= 1");
    if (t_min <= k)
      throw ParameterError("config key 't_min': must exceed k (k = " +
                           std::to_string(k) + ")");
    if (t_max < t_min)
      throw ParameterError("config key 't_max': must be >= t_min");
    if (d < t_max)
      throw ParameterError("config key 'd': must be >= t_max for the "
                           "Gaussian ensemble");
    if (trials < 1) throw ParameterError("config key 'trials': must be >= 1");
    if (mc_draws < 1)
      throw ParameterError("config key 'mc_draws': must be >= 1");
    if (levels.empty())
      throw ParameterError("config key 'sigmas': must be nonempty");
    for (double s : levels) {
      if (s < 0.0) throw ParameterError("config key 'sigmas': negative level");
      if (corruption != CorruptionKind::additive_gaussian && s > 1.0)
        throw ParameterError(
            "config key 'sigmas': deletion/pruning levels must be in [0, 1]");
    }
    if (variance < 0.0)
      throw ParameterError("config key 'variance': must be >= 0 (0 selects 1/d)");
  }
};

inline CorruptionSpec make_corruption(CorruptionKind kind, double level) {
  switch (kind) {
    case CorruptionKind::additive_gaussian:
      return CorruptionSpec::additive_gaussian(level);
    case CorruptionKind::random_deletion:
      return CorruptionSpec::random_deletion(level);
    case CorruptionKind::magnitude_prune:
      return CorruptionSpec::magnitude_prune(level);
  }
  throw ParameterError("make_corruption: unknown kind");
}

struct SweepResult {
  std::vector<ResultRow> rows;
  std::filesystem::path out;
};

/// Runs the task-growth noise sweep. Each trial samples one d x t_max
/// Gaussian task matrix with per-column seeds; each T uses its prefix
/// columns, so growing the grid never perturbs existing rows. Rows are
/// sorted by (T, level index, trial) and written atomically; identical
/// configs yield byte-identical files.
inline SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const double variance =
      cfg.variance > 0.0 ? cfg.variance : 1.0 / static_cast<double>(cfg.d);

  struct Keyed {
    Index t;
    std::size_t level_idx;
    int trial;
    ResultRow row;
  };
  std::vector<Keyed> keyed;

  for (int trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t matrix_seed =
        mix_seed(cfg.master_seed, {static_cast<std::uint64_t>(trial)});
    const TaskMatrix c_full =
        sample_gaussian_task_matrix(cfg.d, cfg.t_max, variance, matrix_seed);
    for (Index t = cfg.t_min; t <= cfg.t_max; ++t) {
      const TaskMatrix c{c_full.entries.leftCols(t)};
      const FactorizedModel model = svd_solution(c, cfg.k);
      const double slope = robustness_slope(c, cfg.k);
      const MseReport noiseless = noiseless_mse(c, model);
      for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
        const double level = cfg.levels[li];
        const std::uint64_t row_seed =
            mix_seed(cfg.master_seed,
                     {static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(li),
                      static_cast<std::uint64_t>(trial)});
        ResultRow row;
        row.experiment_id = cfg.experiment_id;
        row.d = cfg.d;
        row.t = t;
        row.k = cfg.k;
        row.sigma = level;
        row.trial = trial;
        row.slope = slope;
        row.seed = row_seed;
        if (cfg.corruption == CorruptionKind::additive_gaussian)
          row.mse_closed = noiseless.average + slope * level * level;
        const MseReport mc =
            monte_carlo_mse(c, model, make_corruption(cfg.corruption, level),
                            cfg.mc_draws, row_seed);
        row.mse_mc = mc.average;
        row.mc_std_error = mc.mc_std_error;
        keyed.push_back({t, li, trial, std::move(row)});
      }
    }
  }

  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.level_idx != b.level_idx) return a.level_idx < b.level_idx;
    return a.trial < b.trial;
  });
  SweepResult result;
  result.rows.reserve(keyed.size());
  for (auto& item : keyed) result.rows.push_back(std::move(item.row));
  result.out = cfg.out;
  write_result_csv(cfg.out, result.rows);
  return result;
}

// ---------------------------------------------------------------------------
// verify: bundled invariant checks with one pass/fail line each.

struct VerifyConfig {
  std::uint64_t master_seed = 2024;
  bool inject_sign_corruption = false;  // negative control

  static VerifyConfig from_map(const ConfigMap& map) {
    ConfigReader reader(map);
    VerifyConfig cfg;
    cfg.master_seed = reader.get_u64("master_seed", cfg.master_seed);
    cfg.inject_sign_corruption =
        reader.get_int("inject_sign_corruption", 0) != 0;
    reader.reject_unknown_keys();
    return cfg;
  }
};

struct VerifyCheck {
  std::string name;
  std::string detail;  // measured vs threshold
  bool pass = false;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_passed = true;
  double elapsed_seconds = 0.0;

  void add(VerifyCheck check) {
    all_passed = all_passed && check.pass;
    checks.push_back(std::move(check));
  }
};

namespace detail {

inline TaskMatrix random_task_matrix(Rng& rng, Index d, Index t, double scale) {
  TaskMatrix c;
  c.entries.resize(d, t);
  rng.fill_normal(c.entries, scale);
  return c;
}

}  // namespace detail

/// Executes the bundled library checks: the two- and three-task golden
/// example, closed-form vs Monte Carlo agreement, the head-norm identity,
/// interlacing, spectral concentration and the aligned-task control.
inline VerifyReport run_verify(const VerifyConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  VerifyReport report;

  {  // Golden example: orthonormal tasks in R^3.
    TaskMatrix two_tasks{Matrix::Identity(3, 3).leftCols(2)};
    TaskMatrix three_tasks{Matrix::Identity(3, 3)};
    const double r2 = robustness_slope(two_tasks, 1);
    const double r3 = robustness_slope(three_tasks, 1);
    const double res2 = best_rank_k_residual(two_tasks, 1);
    const double res3 = best_rank_k_residual(three_tasks, 1);
    const double err =
        std::max({std::abs(r2 - 0.5), std::abs(r3 - 1.0 / 3.0),
                  std::abs(res2 - 1.0), std::abs(res3 - 2.0)});
    VerifyCheck check;
    check.name = "toy-example";
    check.pass = err < 1e-12;
    check.detail = "R(2)=" + format_real(r2) + " R(3)=" + format_real(r3) +
                   " residuals=(" + format_real(res2) + "," +
                   format_real(res3) + ") max|err|=" + format_real(err) +
                   " vs 1e-12";
    report.add(std::move(check));
  }

  {  // Closed form vs Monte Carlo under additive noise.
    constexpr int kTrials = 50;
    constexpr std::int64_t kDraws = 20000;
    const double sigmas[3] = {0.1, 0.5, 1.0};
    int agree = 0;
    Rng rng(mix_seed(cfg.master_seed, {1}));
    for (int trial = 0; trial < kTrials; ++trial) {
      const TaskMatrix c = detail::random_task_matrix(rng, 32, 6, 1.0);
      const FactorizedModel model = svd_solution(c, 3);
      const double sigma = sigmas[trial % 3];
      const MseReport closed = closed_form_noisy_mse(c, model, sigma);
      const MseReport mc = monte_carlo_mse(
          c, model, CorruptionSpec::additive_gaussian(sigma), kDraws,
          mix_seed(cfg.master_seed, {2, static_cast<std::uint64_t>(trial)}));
      if (std::abs(mc.average - closed.average) <= 3.0 * mc.mc_std_error)
        ++agree;
    }
    VerifyCheck check;
    check.name = "noise-law-oracle";
    check.pass = agree >= 49;
    check.detail = std::to_string(agree) + "/" + std::to_string(kTrials) +
                   " runs within 3 MC standard errors vs >= 49";
    report.add(std::move(check));
  }

  {  // Head-norm identity + solution residual on random matrices.
    constexpr int kTrials = 200;
    double worst = 0.0;
    Rng rng(mix_seed(cfg.master_seed, {3}));
    for (int trial = 0; trial < kTrials; ++trial) {
      const Index d = 5 + static_cast<Index>(rng.next_u64() % 28);
      const Index t = 2 + static_cast<Index>(
                              rng.next_u64() %
                              static_cast<std::uint64_t>(std::min<Index>(d - 1, 10)));
      const Index k = 1 + static_cast<Index>(
                              rng.next_u64() % static_cast<std::uint64_t>(t));
      if (k >= std::min(d, t)) continue;
      const TaskMatrix c = detail::random_task_matrix(
          rng, d, t, 1.0 / std::sqrt(static_cast<double>(d)));
      FactorizedModel model = svd_solution(c, k);
      if (cfg.inject_sign_corruption)
        model.w.row(model.k() - 1) = -model.w.row(model.k() - 1);
      const HeadNormIdentity identity = gamma_regularization_check(model, c);
      const double residual_direct =
          (c.entries - model.reconstruct()).squaredNorm();
      const double residual_spectral = best_rank_k_residual(c, k);
      worst = std::max(worst,
                       std::abs(identity.gamma_frob_sq - identity.top_k_sum));
      worst = std::max(worst, std::abs(residual_direct - residual_spectral));
    }
    VerifyCheck check;
    check.name = "head-norm-identity";
    check.pass = worst < 1e-10;
    check.detail = "max deviation " + format_real(worst) + " vs 1e-10" +
                   (cfg.inject_sign_corruption ? " [sign corruption injected]"
                                               : "");
    report.add(std::move(check));
  }

  {  // Interlacing under appended columns.
    constexpr int kTrials = 200;
    double worst = 0.0;
    int violations = 0;
    Rng rng(mix_seed(cfg.master_seed, {4}));
    for (int trial = 0; trial < kTrials; ++trial) {
      const TaskMatrix c = detail::random_task_matrix(rng, 32, 8, 1.0);
      const Vector column = rng.normal_vector(32);
      const InterlacingResult result = interlacing_check(c, column);
      worst = std::max(worst, result.max_violation);
      if (!result.ok) ++violations;
    }
    VerifyCheck check;
    check.name = "interlacing";
    check.pass = violations == 0;
    check.detail = std::to_string(violations) + "/" + std::to_string(kTrials) +
                   " violations (worst slack " + format_real(worst) +
                   ") vs 0 at 1e-10";
    report.add(std::move(check));
  }

  {  // Spectral concentration of Gaussian prefixes.
    EnsembleConfig ensemble;
    ensemble.d = 1024;
    ensemble.t_max = 8;
    ensemble.k = 4;
    ensemble.trials = 100;
    ensemble.master_seed = mix_seed(cfg.master_seed, {5});
    const SpectralBoundReport bounds =
        spectral_concentration_check(ensemble, 8, 0.2);
    // Allowed rate: both one-sided bounds plus binomial slack; effectively 0
    // at these sizes.
    const double allowed_rate = 2.0 * bounds.bound_probability;
    const int allowed = static_cast<int>(
        std::ceil(allowed_rate * bounds.trials +
                  3.0 * std::sqrt(allowed_rate * bounds.trials + 1e-12)));
    VerifyCheck check;
    check.name = "spectral-concentration";
    check.pass = bounds.violations <= allowed;
    check.detail = std::to_string(bounds.violations) + "/" +
                   std::to_string(bounds.trials) + " violations vs <= " +
                   std::to_string(allowed) + " (sigma range [" +
                   format_real(bounds.empirical_sigma_min) + ", " +
                   format_real(bounds.empirical_sigma_max) + "], bounds [" +
                   format_real(bounds.bound_min) + ", " +
                   format_real(bounds.bound_max) + "])";
    report.add(std::move(check));
  }

  {  // Aligned tasks: identical columns give a constant slope.
    Rng rng(mix_seed(cfg.master_seed, {6}));
    Vector c = rng.unit_sphere(24);
    double worst = 0.0;
    double r2 = 0.0;
    for (Index t = 2; t <= 12; ++t) {
      TaskMatrix aligned;
      aligned.entries = c * Matrix::Ones(1, t);
      const double slope = robustness_slope(aligned, 1);
      if (t == 2) r2 = slope;
      worst = std::max(worst, std::abs(slope - r2));
    }
    VerifyCheck check;
    check.name = "aligned-task-control";
    check.pass = worst < 1e-10;
    check.detail = "max |R(T) - R(2)| = " + format_real(worst) +
                   " vs 1e-10 (no robustness gain without diversity)";
    report.add(std::move(check));
  }

  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

// ---------------------------------------------------------------------------
// real-data: IDX/CSV ingestion, binary tasks, learned task vectors, trends.

/// Disjoint digit pairs first, then cyclic overlapping pairs; up to 15 tasks
/// for 10-class data.
inline std::vector<LabelPair> default_label_pairs() {
  return {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9},
          {0, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 6},
          {5, 7}, {6, 8}, {7, 9}, {8, 0}, {9, 1}};
}

struct RealDataConfig {
  std::string experiment_id = "real-data";
  std::filesystem::path features_path;  // IDX images
  std::filesystem::path labels_path;    // IDX labels
  std::filesystem::path csv_path;       // alternative: headered CSV
  std::vector<LabelPair> pairs = default_label_pairs();
  Index k = 4;
  Index t_max = 14;
  std::int64_t total_budget = 4000;
  double ridge = 1e-3;
  std::vector<double> sigmas = {0.0, 0.05, 0.1, 0.2, 0.4, 0.8};
  std::int64_t mc_draws = 0;  // 0 = closed form only
  std::uint64_t master_seed = 7;
  std::filesystem::path out = "real_data.csv";

  static RealDataConfig from_map(const ConfigMap& map) {
    ConfigReader reader(map);
    RealDataConfig cfg;
    cfg.experiment_id = reader.get_string("experiment_id", cfg.experiment_id);
    cfg.features_path = reader.get_string("features", "");
    cfg.labels_path = reader.get_string("labels", "");
    cfg.csv_path = reader.get_string("csv", "");
    if (reader.has("pairs")) cfg.pairs = reader.get_pair_list("pairs", cfg.pairs);
    cfg.k = reader.get_int("k", cfg.k);
    cfg.t_max = reader.get_int("t_max", cfg.t_max);
    cfg.total_budget = reader.get_int("total_budget", cfg.total_budget);
    cfg.ridge = reader.get_real("ridge", cfg.ridge);
    cfg.sigmas = reader.get_real_list("sigmas", cfg.sigmas);
    cfg.mc_draws = reader.get_int("mc_draws", cfg.mc_draws);
    cfg.master_seed = reader.get_u64("master_seed", cfg.master_seed);
    cfg.out = reader.get_string("out", cfg.out.string());
    reader.reject_unknown_keys();
    return cfg;
  }

  void validate() const {
    const bool has_idx = !features_path.empty() && !labels_path.empty();
    const bool has_csv = !csv_path.empty();
    if (has_idx == has_csv)
      throw ParameterError(
          "config: provide either 'features'+'labels' (IDX) or 'csv', not "
          "both/neither");
    if (k < 1) throw ParameterError("config key 'k': must be >= 1");
    if (t_max <= k)
      throw ParameterError("config key 't_max': must exceed k");
    if (static_cast<std::size_t>(t_max) > pairs.size())
      throw ParameterError("config key 't_max': exceeds available pairs (" +
                           std::to_string(pairs.size()) + ")");
    if (total_budget < t_max)
      throw ParameterError("config key 'total_budget': too small");
    if (ridge < 0.0) throw ParameterError("config key 'ridge': must be >= 0");
    if (sigmas.empty())
      throw ParameterError("config key 'sigmas': must be nonempty");
    if (mc_draws < 0)
      throw ParameterError("config key 'mc_draws': must be >= 0");
  }
};

struct RealDataPoint {
  double sigma = 0.0;
  double mse_closed = 0.0;
  std::optional<double> mse_mc;
  std::optional<double> mc_std_error;
};

struct RealDataTaskRecord {
  Index t = 0;
  double slope = 0.0;
  std::int64_t per_task_count = 0;  // floor(total_budget / T)
  std::vector<RealDataPoint> points;
};

struct RealDataResult {
  std::vector<RealDataTaskRecord> records;
  std::vector<ResultRow> rows;
  std::vector<std::string> warnings;
  std::filesystem::path out;
  std::filesystem::path meta_out;
};

/// For each T in {k+1 .. t_max}: rebuild the binary tasks from the first T
/// label pairs with per-task budget floor(total_budget / T) (total training
/// size stays constant as tasks grow), fit task vectors by ridge regression,
/// factorize at rank k and emit slope plus MSE-vs-noise rows. The learned
/// task matrix is the ground truth the corrupted model is scored against.
inline RealDataResult run_real_data(const RealDataConfig& cfg) {
  cfg.validate();

  Matrix features;
  std::vector<int> labels;
  if (!cfg.csv_path.empty()) {
    auto loaded = load_feature_csv(cfg.csv_path);
    features = std::move(loaded.first);
    labels = std::move(loaded.second);
  } else {
    if (!std::filesystem::exists(cfg.features_path))
      throw IoError("features file '" + cfg.features_path.string() +
                    "' does not exist");
    if (!std::filesystem::exists(cfg.labels_path))
      throw IoError("labels file '" + cfg.labels_path.string() +
                    "' does not exist");
    features = load_idx_images(cfg.features_path);
    labels = load_idx_labels(cfg.labels_path);
  }
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw FormatError("feature/label count mismatch: " +
                      std::to_string(features.rows()) + " vs " +
                      std::to_string(labels.size()));

  RealDataResult result;
  for (Index t = cfg.k + 1; t <= cfg.t_max; ++t) {
    const std::vector<LabelPair> pairs(cfg.pairs.begin(),
                                       cfg.pairs.begin() + t);
    TaskDataset dataset = build_binary_tasks(
        features, labels, pairs, cfg.total_budget,
        mix_seed(cfg.master_seed, {static_cast<std::uint64_t>(t)}));
    for (std::string& w : dataset.warnings)
      result.warnings.push_back("T=" + std::to_string(t) + ": " + std::move(w));
    const TaskMatrix c = fit_least_squares_task_vectors(dataset, cfg.ridge);
    const FactorizedModel model = svd_solution(c, cfg.k);
    const double slope = robustness_slope(c, cfg.k);
    const MseReport noiseless = noiseless_mse(c, model);

    RealDataTaskRecord record;
    record.t = t;
    record.slope = slope;
    record.per_task_count = dataset.per_task_budget;
    for (std::size_t si = 0; si < cfg.sigmas.size(); ++si) {
      const double sigma = cfg.sigmas[si];
      const std::uint64_t row_seed = mix_seed(
          cfg.master_seed, {static_cast<std::uint64_t>(t),
                            static_cast<std::uint64_t>(si), 0});
      RealDataPoint point;
      point.sigma = sigma;
      point.mse_closed = noiseless.average + slope * sigma * sigma;
      ResultRow row;
      row.experiment_id = cfg.experiment_id;
      row.d = features.cols();
      row.t = t;
      row.k = cfg.k;
      row.sigma = sigma;
      row.trial = 0;
      row.mse_closed = point.mse_closed;
      row.slope = slope;
      row.seed = row_seed;
      if (cfg.mc_draws > 0) {
        const MseReport mc =
            monte_carlo_mse(c, model, CorruptionSpec::additive_gaussian(sigma),
                            cfg.mc_draws, row_seed);
        point.mse_mc = mc.average;
        point.mc_std_error = mc.mc_std_error;
        row.mse_mc = mc.average;
        row.mc_std_error = mc.mc_std_error;
      }
      record.points.push_back(point);
      result.rows.push_back(std::move(row));
    }
    result.records.push_back(std::move(record));
  }

  result.out = cfg.out;
  write_result_csv(cfg.out, result.rows);

  std::string meta = "experiment_id = " + cfg.experiment_id + "\n";
  meta += "total_budget = " + std::to_string(cfg.total_budget) + "\n";
  meta += "k = " + std::to_string(cfg.k) + "\n";
  meta += "ridge = " + format_real(cfg.ridge) + "\n";
  meta += "master_seed = " + std::to_string(cfg.master_seed) + "\n";
  for (const RealDataTaskRecord& record : result.records)
    meta += "per_task_count_T" + std::to_string(record.t) + " = " +
            std::to_string(record.per_task_count) + "\n";
  for (const std::string& warning : result.warnings)
    meta += "warning = " + warning + "\n";
  result.meta_out = cfg.out.string() + ".meta";
  write_file_atomic(result.meta_out, meta);
  return result;
}

/// Number of consecutive record pairs whose slope does not increase.
inline int count_nonincreasing_slopes(const std::vector<RealDataTaskRecord>& records) {
  int count = 0;
  for (std::size_t i = 0; i + 1 < records.size(); ++i)
    if (records[i + 1].slope <= records[i].slope + 1e-15) ++count;
  return count;
}

/// Looks for one pair (T_small, T_large) whose closed-form MSE curves swap
/// order between the smallest and largest sigma in the grid.
inline bool has_mse_crossover(const std::vector<RealDataTaskRecord>& records) {
  for (std::size_t i = 0; i < records.size(); ++i)
    for (std::size_t j = i + 1; j < records.size(); ++j) {
      const auto& small = records[i].points;
      const auto& large = records[j].points;
      if (small.empty() || large.empty()) continue;
      const bool starts_above =
          large.front().mse_closed >= small.front().mse_closed;
      const bool ends_below = large.back().mse_closed < small.back().mse_closed;
      if (starts_above && ends_below) return true;
    }
  return false;
}

// ---------------------------------------------------------------------------
// Demo dataset: clustered synthetic images in IDX format, for exercising the
// real-data pipeline where no MNIST files are available.

struct DemoDataPaths {
  std::filesystem::path images;
  std::filesystem::path labels;
};

/// Writes a 10-class clustered image dataset (IDX pair) under `dir`. Each
/// class has a smooth random bump pattern as its mean; samples add pixel
/// noise. Deterministic given the seed.
inline DemoDataPaths write_demo_image_dataset(const std::filesystem::path& dir,
                                              int per_class = 400,
                                              std::uint64_t seed = 99,
                                              int side = 16,
                                              int n_classes = 10) {
  if (per_class < 1 || side < 2 || n_classes < 2)
    throw ParameterError("write_demo_image_dataset: bad parameters");
  std::filesystem::create_directories(dir);
  const Index d = static_cast<Index>(side) * side;

  if (d < n_classes)
    throw ParameterError("write_demo_image_dataset: need side^2 >= classes");

  // Class means: smooth random bump patterns, orthogonalized across classes
  // and rescaled to a common contrast, so class pairs are comparably
  // separable and class directions are structurally diverse.
  Matrix patterns(d, n_classes);
  for (int cls = 0; cls < n_classes; ++cls) {
    Rng rng(mix_seed(seed, {static_cast<std::uint64_t>(cls), 0}));
    Vector pattern = Vector::Zero(d);
    const int bumps = 2 + side / 8;
    for (int bump = 0; bump < bumps; ++bump) {
      const double r0 = rng.uniform() * (side - 1);
      const double c0 = rng.uniform() * (side - 1);
      const double amp = (0.5 + 0.5 * rng.uniform()) *
                         (bump % 2 == 0 ? 1.0 : -1.0);
      const double width = 1.0 + 0.1 * side * rng.uniform();
      for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
          const double dist2 = (r - r0) * (r - r0) + (c - c0) * (c - c0);
          pattern(static_cast<Index>(r) * side + c) +=
              amp * std::exp(-dist2 / (2.0 * width * width));
        }
    }
    pattern.array() -= pattern.mean();
    patterns.col(cls) = pattern;
  }
  const Matrix ortho = Eigen::HouseholderQR<Matrix>(patterns).householderQ() *
                       Matrix::Identity(d, n_classes);
  std::vector<Vector> means;
  means.reserve(static_cast<std::size_t>(n_classes));
  for (int cls = 0; cls < n_classes; ++cls) {
    Vector mean = Vector::Constant(d, 0.5) + 1.2 * ortho.col(cls);
    for (Index i = 0; i < d; ++i)
      mean(i) = std::min(1.0, std::max(0.0, mean(i)));
    means.push_back(std::move(mean));
  }

  const Index n = static_cast<Index>(n_classes) * per_class;
  Matrix images(n, d);
  std::vector<int> labels(static_cast<std::size_t>(n));
  Index row = 0;
  for (int cls = 0; cls < n_classes; ++cls) {
    Rng rng(mix_seed(seed, {static_cast<std::uint64_t>(cls), 1}));
    for (int s = 0; s < per_class; ++s, ++row) {
      labels[static_cast<std::size_t>(row)] = cls;
      for (Index i = 0; i < d; ++i) {
        const double v = means[static_cast<std::size_t>(cls)](i) +
                         0.10 * rng.normal();
        images(row, i) = std::min(1.0, std::max(0.0, v));
      }
    }
  }

  DemoDataPaths paths{dir / "demo-images-idx3-ubyte", dir / "demo-labels-idx1-ubyte"};
  write_idx_images(paths.images, images, static_cast<std::uint32_t>(side),
                   static_cast<std::uint32_t>(side));
  write_idx_labels(paths.labels, labels);
  return paths;
}

/// Looks for MNIST training files (MTROB_MNIST_DIR, then ./data/mnist).
inline std::optional<DemoDataPaths> find_mnist() {
  std::vector<std::filesystem::path> candidates;
  if (const char* env = std::getenv("MTROB_MNIST_DIR")) candidates.push_back(env);
  candidates.push_back("data/mnist");
  for (const auto& dir : candidates) {
    for (const char* images :
         {"train-images-idx3-ubyte", "train-images.idx3-ubyte"}) {
      for (const char* labels :
           {"train-labels-idx1-ubyte", "train-labels.idx1-ubyte"}) {
        const auto image_path = dir / std::filesystem::path(images);
        const auto label_path = dir / std::filesystem::path(labels);
        if (std::filesystem::exists(image_path) &&
            std::filesystem::exists(label_path))
          return DemoDataPaths{image_path, label_path};
      }
    }
  }
  return std::nullopt;
}

}  // namespace mtrob
