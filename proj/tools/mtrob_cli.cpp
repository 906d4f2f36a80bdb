// Command-line driver for the multitask robustness laboratory.
//
// Subcommands:
//   sweep          synthetic Gaussian task ensembles, MSE-vs-noise CSV
//   verify         bundled library invariant checks
//   real-data      labeled datasets -> binary tasks -> slope/MSE trends
//   make-demo-data generate a clustered IDX image dataset for real-data runs
//
// Exit codes: 0 success, 1 check failure, 2 usage/config/IO error.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "mtrob/mtrob.hpp"

namespace {

struct FlagValues {
  std::string config_path;
  std::string experiment_id, out, corruption, sigmas, pairs;
  std::string features, labels, csv, dir;
  std::int64_t d = 0, k = 0, t_min = 0, t_max = 0, trials = 0, draws = 0;
  std::int64_t budget = 0, per_class = 0, side = 0;
  std::uint64_t seed = 0;
  double ridge = 0.0, variance = 0.0;
  bool inject_sign_corruption = false;
};

mtrob::ConfigMap collect(const CLI::App& cmd, const FlagValues& flags) {
  mtrob::ConfigMap map;
  if (!flags.config_path.empty())
    map = mtrob::parse_config_file(flags.config_path);
  const auto set_if = [&](const char* flag, const char* key,
                          const std::string& value) {
    const CLI::Option* opt = cmd.get_option_no_throw(flag);
    if (opt != nullptr && opt->count() > 0) map[key] = value;
  };
  set_if("--id", "experiment_id", flags.experiment_id);
  set_if("--out", "out", flags.out);
  set_if("--d", "d", std::to_string(flags.d));
  set_if("--k", "k", std::to_string(flags.k));
  set_if("--t-min", "t_min", std::to_string(flags.t_min));
  set_if("--t-max", "t_max", std::to_string(flags.t_max));
  set_if("--trials", "trials", std::to_string(flags.trials));
  set_if("--draws", "mc_draws", std::to_string(flags.draws));
  set_if("--seed", "master_seed", std::to_string(flags.seed));
  set_if("--sigmas", "sigmas", flags.sigmas);
  set_if("--corruption", "corruption", flags.corruption);
  set_if("--variance", "variance", std::to_string(flags.variance));
  set_if("--features", "features", flags.features);
  set_if("--labels", "labels", flags.labels);
  set_if("--csv", "csv", flags.csv);
  set_if("--pairs", "pairs", flags.pairs);
  set_if("--budget", "total_budget", std::to_string(flags.budget));
  set_if("--ridge", "ridge", std::to_string(flags.ridge));
  if (flags.inject_sign_corruption) map["inject_sign_corruption"] = "1";
  return map;
}

int run_sweep_command(const CLI::App& cmd, const FlagValues& flags) {
  const auto cfg = mtrob::SweepConfig::from_map(collect(cmd, flags));
  const auto result = mtrob::run_sweep(cfg);
  std::cout << "wrote " << result.rows.size() << " rows to "
            << result.out.string() << "\n";
  return 0;
}

int run_verify_command(const CLI::App& cmd, const FlagValues& flags) {
  const auto cfg = mtrob::VerifyConfig::from_map(collect(cmd, flags));
  const auto report = mtrob::run_verify(cfg);
  for (const auto& check : report.checks)
    std::cout << check.name << ": " << check.detail << " "
              << (check.pass ? "PASS" : "FAIL") << "\n";
  std::cout << (report.all_passed ? "all checks passed" : "CHECKS FAILED")
            << " (" << mtrob::format_real(report.elapsed_seconds) << " s)\n";
  return report.all_passed ? 0 : 1;
}

int run_real_data_command(const CLI::App& cmd, const FlagValues& flags) {
  auto map = collect(cmd, flags);
  if (map.find("features") == map.end() && map.find("csv") == map.end()) {
    // Fall back to MNIST when it is present locally.
    if (const auto mnist = mtrob::find_mnist()) {
      map["features"] = mnist->images.string();
      map["labels"] = mnist->labels.string();
      std::cout << "using MNIST from " << mnist->images.string() << "\n";
    }
  }
  const auto cfg = mtrob::RealDataConfig::from_map(map);
  const auto result = mtrob::run_real_data(cfg);
  for (const auto& record : result.records)
    std::cout << "T=" << record.t << " slope=" << mtrob::format_real(record.slope)
              << " per_task=" << record.per_task_count << "\n";
  for (const auto& warning : result.warnings)
    std::cout << "warning: " << warning << "\n";
  std::cout << "wrote " << result.rows.size() << " rows to "
            << result.out.string() << " (metadata: " << result.meta_out.string()
            << ")\n";
  return 0;
}

int run_demo_data_command(const FlagValues& flags) {
  const auto paths = mtrob::write_demo_image_dataset(
      flags.dir.empty() ? "demo_data" : flags.dir,
      flags.per_class > 0 ? static_cast<int>(flags.per_class) : 400,
      flags.seed, flags.side > 0 ? static_cast<int>(flags.side) : 16);
  std::cout << "wrote " << paths.images.string() << "\n"
            << "wrote " << paths.labels.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multitask structural-robustness laboratory"};
  app.require_subcommand(1);
  FlagValues flags;

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Gaussian task ensembles: slope and MSE vs corruption level");
  sweep->add_option("--config", flags.config_path, "key=value config file");
  sweep->add_option("--id", flags.experiment_id, "experiment id column");
  sweep->add_option("--d", flags.d, "feature dimension");
  sweep->add_option("--k", flags.k, "representation dimension");
  sweep->add_option("--t-min", flags.t_min, "smallest task count");
  sweep->add_option("--t-max", flags.t_max, "largest task count");
  sweep->add_option("--sigmas", flags.sigmas,
                    "comma list of corruption levels (sigma or p)");
  sweep->add_option("--trials", flags.trials, "trials per task count");
  sweep->add_option("--draws", flags.draws, "Monte Carlo draws per cell");
  sweep->add_option("--seed", flags.seed, "master seed");
  sweep->add_option("--corruption", flags.corruption,
                    "additive-gaussian | random-deletion | magnitude-prune");
  sweep->add_option("--variance", flags.variance,
                    "task entry variance (default 1/d)");
  sweep->add_option("--out", flags.out, "output CSV path");

  CLI::App* verify =
      app.add_subcommand("verify", "run the bundled invariant checks");
  verify->add_option("--config", flags.config_path, "key=value config file");
  verify->add_option("--seed", flags.seed, "master seed");
  verify->add_flag("--inject-sign-corruption", flags.inject_sign_corruption,
                   "negative control: corrupt one factor sign and expect FAIL");

  CLI::App* real = app.add_subcommand(
      "real-data", "binary tasks from labeled data, slope and MSE trends");
  real->add_option("--config", flags.config_path, "key=value config file");
  real->add_option("--id", flags.experiment_id, "experiment id column");
  real->add_option("--features", flags.features, "IDX image file");
  real->add_option("--labels", flags.labels, "IDX label file");
  real->add_option("--csv", flags.csv,
                   "headered CSV (features..., integer label)");
  real->add_option("--pairs", flags.pairs, "label pairs, e.g. 0:1,2:3");
  real->add_option("--k", flags.k, "representation dimension");
  real->add_option("--t-max", flags.t_max, "largest task count");
  real->add_option("--budget", flags.budget, "total training samples");
  real->add_option("--ridge", flags.ridge, "ridge regularization");
  real->add_option("--sigmas", flags.sigmas, "comma list of noise sigmas");
  real->add_option("--draws", flags.draws, "Monte Carlo draws (0 = closed only)");
  real->add_option("--seed", flags.seed, "master seed");
  real->add_option("--out", flags.out, "output CSV path");

  CLI::App* demo = app.add_subcommand(
      "make-demo-data", "write a clustered IDX image dataset");
  demo->add_option("--dir", flags.dir, "output directory");
  demo->add_option("--per-class", flags.per_class, "samples per class");
  demo->add_option("--side", flags.side, "image side length");
  demo->add_option("--seed", flags.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sweep->parsed()) return run_sweep_command(*sweep, flags);
    if (verify->parsed()) return run_verify_command(*verify, flags);
    if (real->parsed()) return run_real_data_command(*real, flags);
    if (demo->parsed()) return run_demo_data_command(flags);
  } catch (const mtrob::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
