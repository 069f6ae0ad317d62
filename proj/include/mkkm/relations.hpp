#pragma once

#include "mkkm/kernels.hpp"

#include <Eigen/Dense>

namespace mkkm {

/// Pairwise kernel relations over a bank. Constants of the optimization,
/// computed once per bank.
struct RelationMatrices {
  /// M(p,q) = Tr(Kp^T Kq), the Frobenius inner product.
  Eigen::MatrixXd correlation;
  /// D(p,q) = sum_ij |Kp(i,j) - Kq(i,j)|, the entrywise Manhattan distance.
  Eigen::MatrixXd dissimilarity;

  Eigen::Index m() const { return correlation.rows(); }
};

Eigen::MatrixXd correlation_matrix(const KernelBank& bank);
Eigen::MatrixXd dissimilarity_matrix(const KernelBank& bank);
RelationMatrices compute_relations(const KernelBank& bank);

}  // namespace mkkm
