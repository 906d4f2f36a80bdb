#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mtrob/errors.hpp"
#include "mtrob/linalg.hpp"
#include "mtrob/rng.hpp"
#include "mtrob/types.hpp"

namespace mtrob {

/// Samples of one regression task; inputs are rows.
struct TaskSamples {
  Matrix inputs;  // n x d
  Vector labels;  // n

  Index size() const { return inputs.rows(); }
};

struct TaskDataset {
  std::vector<TaskSamples> tasks;
  Index dim = 0;
  std::int64_t per_task_budget = 0;
  std::vector<std::string> warnings;  // e.g. per-task sample shortfalls

  Index task_count() const { return static_cast<Index>(tasks.size()); }
};

struct TrainConfig {
  Index k = 1;
  double learning_rate = 0.01;
  int epochs = 100;
  Index batch_size = 0;  // 0 = full batch
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (k < 1) throw ParameterError("TrainConfig: k must be >= 1");
    if (learning_rate <= 0.0)
      throw ParameterError("TrainConfig: learning_rate must be > 0");
    if (epochs < 0) throw ParameterError("TrainConfig: epochs must be >= 0");
    if (batch_size < 0)
      throw ParameterError("TrainConfig: batch_size must be >= 0");
    if (weight_decay < 0.0)
      throw ParameterError("TrainConfig: weight_decay must be >= 0");
  }
};

struct EpochStats {
  double objective = 0.0;           // mean squared error over all samples
  double top_singular_value = 0.0;  // sigma_1 of W^T Gamma
  double gamma_frob_sq = 0.0;
};

using TrainLog = std::vector<EpochStats>;

struct TrainResult {
  FactorizedModel model;
  TrainLog log;
};

/// x ~ N(0, I_d) i.i.d., y = c_i^T x exactly (noiseless regression labels).
inline TaskDataset generate_synthetic_dataset(const TaskMatrix& c,
                                              Index n_per_task,
                                              std::uint64_t seed) {
  if (n_per_task < 1)
    throw ParameterError("generate_synthetic_dataset: n_per_task must be >= 1");
  require_finite(c.entries, "generate_synthetic_dataset");
  TaskDataset dataset;
  dataset.dim = c.dim();
  dataset.per_task_budget = n_per_task;
  dataset.tasks.resize(static_cast<std::size_t>(c.task_count()));
  for (Index i = 0; i < c.task_count(); ++i) {
    Rng rng(mix_seed(seed, {static_cast<std::uint64_t>(i)}));
    TaskSamples& samples = dataset.tasks[static_cast<std::size_t>(i)];
    samples.inputs.resize(n_per_task, c.dim());
    rng.fill_normal(samples.inputs);
    samples.labels = samples.inputs * c.task_vector(i);
  }
  return dataset;
}

/// Per-task ridge regression: c_hat_i = argmin sum (c^T x - y)^2 + ridge ||c||^2.
/// With ridge = 0 the normal equations must be well posed (n >= d and full
/// column rank), otherwise a DegeneracyError is raised.
inline TaskMatrix fit_least_squares_task_vectors(const TaskDataset& dataset,
                                                 double ridge) {
  if (ridge < 0.0)
    throw ParameterError("fit_least_squares_task_vectors: ridge must be >= 0");
  if (dataset.tasks.empty())
    throw InputError("fit_least_squares_task_vectors: empty dataset");
  const Index d = dataset.dim;
  TaskMatrix c;
  c.entries.resize(d, dataset.task_count());
  for (Index i = 0; i < dataset.task_count(); ++i) {
    const TaskSamples& samples = dataset.tasks[static_cast<std::size_t>(i)];
    if (samples.size() < 1)
      throw InputError("fit_least_squares_task_vectors: task " +
                       std::to_string(i) + " has no samples");
    Matrix gram = samples.inputs.transpose() * samples.inputs;
    gram.diagonal().array() += ridge;
    if (ridge == 0.0) {
      if (samples.size() < d)
        throw DegeneracyError(
            "fit_least_squares_task_vectors: task " + std::to_string(i) +
            " has fewer samples than dimensions and ridge = 0");
      Eigen::JacobiSVD<Matrix> probe(samples.inputs);
      const Vector& sv = probe.singularValues();
      if (sv(sv.size() - 1) <= 1e-12 * sv(0))
        throw DegeneracyError(
            "fit_least_squares_task_vectors: singular normal equations for "
            "task " + std::to_string(i) + "; use ridge > 0");
    }
    const Vector rhs = samples.inputs.transpose() * samples.labels;
    c.entries.col(i) = Eigen::LDLT<Matrix>(gram).solve(rhs);
  }
  return c;
}

namespace detail {

inline double dataset_objective(const TaskDataset& dataset, const Matrix& w,
                                const Matrix& gamma) {
  double total = 0.0;
  for (Index i = 0; i < dataset.task_count(); ++i) {
    const TaskSamples& s = dataset.tasks[static_cast<std::size_t>(i)];
    const Vector pred = s.inputs * (w.transpose() * gamma.col(i));
    total += (pred - s.labels).squaredNorm() / static_cast<double>(s.size());
  }
  return total / static_cast<double>(dataset.task_count());
}

}  // namespace detail

/// Mini-batch gradient descent on the joint factorized regression objective
/// (mean squared error across tasks, shared W, per-task heads). The final
/// factorization is re-orthonormalized so all scaling ends up in Gamma.
/// batch_size 0 runs full-batch steps, which makes the per-epoch objective
/// monotone for small enough learning rates.
inline TrainResult fit_factorized_gd(const TaskDataset& dataset,
                                     const TrainConfig& config) {
  config.validate();
  if (dataset.tasks.empty())
    throw InputError("fit_factorized_gd: empty dataset");
  const Index t = dataset.task_count();
  const Index d = dataset.dim;
  if (config.k >= t)
    throw RegimeError("fit_factorized_gd: requires k < T (k = " +
                      std::to_string(config.k) + ", T = " + std::to_string(t) +
                      ")");
  for (Index i = 0; i < t; ++i)
    if (dataset.tasks[static_cast<std::size_t>(i)].size() < 1)
      throw InputError("fit_factorized_gd: task " + std::to_string(i) +
                       " has no samples");

  Rng rng(config.seed);
  Matrix w(config.k, d);
  rng.fill_normal(w, std::sqrt(1.0 / static_cast<double>(d)));
  Matrix gamma = Matrix::Zero(config.k, t);

  const double initial_objective =
      std::max(detail::dataset_objective(dataset, w, gamma), 1e-300);

  TrainLog log;
  log.reserve(static_cast<std::size_t>(config.epochs));

  std::vector<std::vector<Index>> task_order(static_cast<std::size_t>(t));
  for (Index i = 0; i < t; ++i) {
    auto& order = task_order[static_cast<std::size_t>(i)];
    order.resize(static_cast<std::size_t>(
        dataset.tasks[static_cast<std::size_t>(i)].size()));
    for (std::size_t j = 0; j < order.size(); ++j)
      order[j] = static_cast<Index>(j);
  }

  Index max_n = 0;
  for (const auto& task : dataset.tasks) max_n = std::max(max_n, task.size());
  const Index batch = config.batch_size == 0 ? max_n : config.batch_size;
  const Index slots = (max_n + batch - 1) / batch;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (auto& order : task_order) rng.shuffle(order);
    for (Index slot = 0; slot < slots; ++slot) {
      Matrix w_grad = Matrix::Zero(config.k, d);
      Matrix gamma_grad = Matrix::Zero(config.k, t);
      for (Index i = 0; i < t; ++i) {
        const TaskSamples& s = dataset.tasks[static_cast<std::size_t>(i)];
        const auto& order = task_order[static_cast<std::size_t>(i)];
        const Index lo = slot * batch;
        if (lo >= s.size()) continue;
        const Index hi = std::min<Index>(s.size(), lo + batch);
        const Index m = hi - lo;
        Matrix x_batch(m, d);
        Vector y_batch(m);
        for (Index r = 0; r < m; ++r) {
          x_batch.row(r) = s.inputs.row(order[static_cast<std::size_t>(lo + r)]);
          y_batch(r) = s.labels(order[static_cast<std::size_t>(lo + r)]);
        }
        const Vector residual =
            x_batch * (w.transpose() * gamma.col(i)) - y_batch;
        const Vector xr = x_batch.transpose() * residual;  // d
        const double scale =
            2.0 / (static_cast<double>(m) * static_cast<double>(t));
        gamma_grad.col(i) += scale * (w * xr);
        w_grad += scale * (gamma.col(i) * xr.transpose());
      }
      if (config.weight_decay > 0.0) {
        w_grad += 2.0 * config.weight_decay * w;
        gamma_grad += 2.0 * config.weight_decay * gamma;
      }
      w -= config.learning_rate * w_grad;
      gamma -= config.learning_rate * gamma_grad;
    }

    EpochStats stats;
    stats.objective = detail::dataset_objective(dataset, w, gamma);
    stats.top_singular_value =
        Eigen::JacobiSVD<Matrix>(w.transpose() * gamma).singularValues()(0);
    stats.gamma_frob_sq = gamma.squaredNorm();
    log.push_back(stats);
    if (!std::isfinite(stats.objective) ||
        stats.objective > 1e3 * initial_objective)
      throw DivergenceError(
          "fit_factorized_gd: objective exploded at epoch " +
          std::to_string(epoch) + " (" + std::to_string(stats.objective) +
          " vs initial " + std::to_string(initial_objective) +
          "); lower the learning rate");
  }

  TrainResult result{orthonormalize_factorization(w, gamma), std::move(log)};
  return result;
}

using LabelPair = std::pair<int, int>;

/// Builds binary regression tasks from a labeled feature set: task i keeps
/// only samples labeled with pair i, mapping the first label to y = 0 and
/// the second to y = 1. Each task draws at most floor(total_budget / T)
/// samples without replacement; shortfalls are recorded as warnings.
inline TaskDataset build_binary_tasks(const Matrix& features,
                                      const std::vector<int>& labels,
                                      const std::vector<LabelPair>& pairs,
                                      std::int64_t total_budget,
                                      std::uint64_t seed) {
  if (pairs.empty())
    throw ParameterError("build_binary_tasks: pairs must be nonempty");
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw DimensionError("build_binary_tasks: feature rows (" +
                         std::to_string(features.rows()) +
                         ") != label count (" + std::to_string(labels.size()) +
                         ")");
  const Index t = static_cast<Index>(pairs.size());
  const std::int64_t budget = total_budget / t;
  if (budget < 1)
    throw ParameterError("build_binary_tasks: total_budget " +
                         std::to_string(total_budget) +
                         " leaves no samples per task");

  std::map<int, std::vector<Index>> by_label;
  for (std::size_t row = 0; row < labels.size(); ++row)
    by_label[labels[row]].push_back(static_cast<Index>(row));

  TaskDataset dataset;
  dataset.dim = features.cols();
  dataset.per_task_budget = budget;
  dataset.tasks.resize(static_cast<std::size_t>(t));
  for (Index i = 0; i < t; ++i) {
    const auto [first, second] = pairs[static_cast<std::size_t>(i)];
    if (first == second)
      throw ParameterError("build_binary_tasks: pair " + std::to_string(i) +
                           " repeats label " + std::to_string(first));
    for (int lab : {first, second})
      if (by_label.find(lab) == by_label.end())
        throw InputError("build_binary_tasks: pair label " +
                         std::to_string(lab) + " not present in data");
    std::vector<Index> rows = by_label[first];
    rows.insert(rows.end(), by_label[second].begin(), by_label[second].end());
    Rng rng(mix_seed(seed, {static_cast<std::uint64_t>(i)}));
    rng.shuffle(rows);
    const Index take =
        std::min<Index>(static_cast<Index>(rows.size()), budget);
    if (take < budget)
      dataset.warnings.push_back(
          "task " + std::to_string(i) + " (" + std::to_string(first) + " vs " +
          std::to_string(second) + "): only " + std::to_string(take) +
          " of " + std::to_string(budget) + " budgeted samples available");
    TaskSamples& samples = dataset.tasks[static_cast<std::size_t>(i)];
    samples.inputs.resize(take, features.cols());
    samples.labels.resize(take);
    for (Index r = 0; r < take; ++r) {
      const Index row = rows[static_cast<std::size_t>(r)];
      samples.inputs.row(r) = features.row(row);
      samples.labels(r) = labels[static_cast<std::size_t>(row)] == second ? 1.0 : 0.0;
    }
  }
  return dataset;
}

}  // namespace mtrob
