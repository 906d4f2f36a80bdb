#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <string>

#include "mtrob/errors.hpp"
#include "mtrob/types.hpp"

namespace mtrob {

// Relative spectral-gap threshold below which a rank-k cut is treated as
// degenerate (the minimizer is not unique under ties).
inline constexpr double kTieGapTolerance = 1e-8;

/// Diagnostics emitted by svd_solution.
struct SpectrumInfo {
  double gap = 0.0;        // sigma_k - sigma_{k+1}
  double gap_ratio = 0.0;  // gap / sigma_1
  bool near_tie = false;   // gap_ratio below kTieGapTolerance
};

/// Thin SVD with deterministic signs: each U column is flipped (together
/// with its V column) so that its largest-magnitude entry is positive;
/// magnitude ties resolve to the lowest row index.
inline SvdResult svd(const TaskMatrix& c) {
  require_nonempty(c.entries, "svd");
  require_finite(c.entries, "svd");
  Eigen::JacobiSVD<Matrix> dec(c.entries,
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult result{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  for (Index j = 0; j < result.u.cols(); ++j) {
    Index pivot = 0;
    result.u.col(j).cwiseAbs().maxCoeff(&pivot);
    if (result.u(pivot, j) < 0.0) {
      result.u.col(j) = -result.u.col(j);
      result.v.col(j) = -result.v.col(j);
    }
  }
  return result;
}

/// Sum of squared singular values below index k: the Frobenius error of the
/// best rank-k approximation.
inline double best_rank_k_residual(const TaskMatrix& c, Index k) {
  const Index m = std::min(c.dim(), c.task_count());
  if (k < 1) throw ParameterError("best_rank_k_residual: k must be >= 1");
  if (k >= c.task_count())
    throw RegimeError("best_rank_k_residual: k must be < task count (" +
                      std::to_string(k) + " >= " +
                      std::to_string(c.task_count()) + ")");
  if (k >= c.dim())
    throw DimensionError("best_rank_k_residual: k must be < feature dim");
  const SvdResult dec = svd(c);
  double tail = 0.0;
  for (Index i = k; i < m; ++i)
    tail += dec.singular_values(i) * dec.singular_values(i);
  return tail;
}

/// Truncates an SVD to the leading k directions: W = first k rows of U^T,
/// Gamma = diag(sigma_1..sigma_k) times the first k rows of V^T. No regime
/// checks; callers that allow k = min(d,T) (full-rank fits in tests and
/// profiles) use this directly.
inline FactorizedModel truncate_to_rank(const SvdResult& dec, Index k) {
  if (k < 1 || k > dec.u.cols())
    throw ParameterError("truncate_to_rank: k out of range");
  FactorizedModel model;
  model.w = dec.u.leftCols(k).transpose();
  model.gamma = dec.singular_values.head(k).asDiagonal() *
                dec.v.leftCols(k).transpose();
  return model;
}

/// Best factorized rank-k fit of the task matrix, read off the SVD.
/// Requires k < min(d, T); with k >= T every rank-k fit is non-unique.
/// When the spectrum has a near-tie at the cut the subspace is not unique
/// either; the solution is still returned (deterministic via the sign
/// convention) and `info->near_tie` is set.
inline FactorizedModel svd_solution(const TaskMatrix& c, Index k,
                                    SpectrumInfo* info = nullptr) {
  if (k < 1) throw ParameterError("svd_solution: k must be >= 1");
  if (k >= c.task_count())
    throw RegimeError(
        "svd_solution: k >= T leaves infinitely many solutions (k = " +
        std::to_string(k) + ", T = " + std::to_string(c.task_count()) + ")");
  if (k >= c.dim())
    throw DimensionError("svd_solution: k must be < feature dim (k = " +
                         std::to_string(k) + ", d = " +
                         std::to_string(c.dim()) + ")");
  const SvdResult dec = svd(c);
  if (info) {
    const double top = dec.singular_values(0);
    info->gap = dec.singular_values(k - 1) - dec.singular_values(k);
    info->gap_ratio = top > 0.0 ? info->gap / top : 0.0;
    info->near_tie = top == 0.0 || info->gap_ratio < kTieGapTolerance;
  }
  return truncate_to_rank(dec, k);
}

/// Re-expresses an arbitrary full-row-rank factorization with orthonormal
/// rows, pushing all scaling into the heads. The product W^T Gamma is
/// preserved exactly (QR identity). Idempotent on already-orthonormal input.
inline FactorizedModel orthonormalize_factorization(const Matrix& w_raw,
                                                    const Matrix& gamma_raw) {
  require_nonempty(w_raw, "orthonormalize_factorization");
  require_finite(w_raw, "orthonormalize_factorization");
  require_finite(gamma_raw, "orthonormalize_factorization");
  const Index k = w_raw.rows();
  if (gamma_raw.rows() != k)
    throw DimensionError(
        "orthonormalize_factorization: W and Gamma row counts differ");
  if (k > w_raw.cols())
    throw DimensionError(
        "orthonormalize_factorization: more rows than columns in W");

  Eigen::JacobiSVD<Matrix> rank_probe(w_raw);
  const Vector& sv = rank_probe.singularValues();
  if (sv(k - 1) <= 1e-10 * sv(0))
    throw DegeneracyError(
        "orthonormalize_factorization: representation rows are rank "
        "deficient");

  Eigen::HouseholderQR<Matrix> qr(w_raw.transpose());
  Matrix q = qr.householderQ() * Matrix::Identity(w_raw.cols(), k);
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  // Fix signs so R has a nonnegative diagonal; makes the map idempotent.
  for (Index i = 0; i < k; ++i) {
    if (r(i, i) < 0.0) {
      r.row(i) = -r.row(i);
      q.col(i) = -q.col(i);
    }
  }
  FactorizedModel model;
  model.w = q.transpose();
  model.gamma = r * gamma_raw;
  return model;
}

}  // namespace mtrob
