#pragma once

#include <Eigen/Core>

#include "mtrob/errors.hpp"

namespace mtrob {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Ground-truth (or learned) task-vector matrix. Column i is the linear
/// predictor for task i; rows index feature dimensions.
struct TaskMatrix {
  Matrix entries;  // d x T

  Index dim() const { return entries.rows(); }
  Index task_count() const { return entries.cols(); }
  Vector task_vector(Index i) const { return entries.col(i); }
};

/// Thin SVD of a task matrix: U (d x m), nonincreasing singular values (m),
/// V (T x m) with m = min(d, T). Column signs are fixed so the
/// largest-magnitude entry of each U column is positive.
struct SvdResult {
  Matrix u;
  Vector singular_values;
  Matrix v;
};

/// Shared representation W (k x d, orthonormal rows) with per-task linear
/// heads as columns of Gamma (k x T). Prediction for task i is
/// gamma_i^T W x. All scaling lives in Gamma; W stays normalized so that
/// additive weight noise on W has a fixed effective scale.
struct FactorizedModel {
  Matrix w;      // k x d
  Matrix gamma;  // k x T

  Index k() const { return w.rows(); }
  Index dim() const { return w.cols(); }
  Index task_count() const { return gamma.cols(); }
  Vector head(Index i) const { return gamma.col(i); }

  /// d x T product W^T Gamma; column i is the reconstructed task vector.
  Matrix reconstruct() const { return w.transpose() * gamma; }
};

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + ": non-finite entries");
}

inline void require_nonempty(const Matrix& m, const char* what) {
  if (m.rows() < 1 || m.cols() < 1)
    throw DimensionError(std::string(what) + ": empty matrix");
}

/// Max deviation of W W^T from the identity, used to enforce the
/// orthonormal-rows contract.
inline double row_orthonormality_defect(const Matrix& w) {
  const Matrix g = w * w.transpose();
  return (g - Matrix::Identity(w.rows(), w.rows())).cwiseAbs().maxCoeff();
}

inline void require_orthonormal_rows(const Matrix& w, const char* what,
                                     double tol = 1e-10) {
  if (row_orthonormality_defect(w) > tol)
    throw ContractError(std::string(what) +
                        ": representation rows are not orthonormal; "
                        "push scaling into the task heads");
}

}  // namespace mtrob
