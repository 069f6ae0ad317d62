#pragma once

#include <Eigen/Dense>

namespace mkkm {

/// Top-k eigenpairs of a symmetric matrix: the continuous cluster indicator.
struct Embedding {
  /// n x k, orthonormal columns.
  Eigen::MatrixXd vectors;
  /// k eigenvalues, descending.
  Eigen::VectorXd values;

  Eigen::Index n() const { return vectors.rows(); }
  Eigen::Index k() const { return vectors.cols(); }
};

/// Eigenvectors of the k largest eigenvalues of symmetric S, computed from a
/// full dense decomposition. Works for indefinite S. Each eigenvector is
/// signed so that its largest-magnitude entry is nonnegative.
///
/// Throws if S is not square, asymmetric beyond 1e-10 * max(1, max|S|), or
/// k is outside [1, n].
Embedding top_k_eigs(const Eigen::MatrixXd& S, Eigen::Index k);

/// Tr(S (I - H H^T)) evaluated as Tr(S) - Tr(H^T S H).
double relaxed_kernel_objective(const Eigen::MatrixXd& S, const Eigen::MatrixXd& H);

}  // namespace mkkm
