#include "mkkm/spectral.hpp"

#include "mkkm/error.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace mkkm {

using Eigen::Index;

Embedding top_k_eigs(const Eigen::MatrixXd& S, Index k) {
  const Index n = S.rows();
  if (S.cols() != n) throw Error("top_k_eigs: matrix is not square");
  if (n == 0) throw Error("top_k_eigs: empty matrix");
  if (k < 1 || k > n)
    throw Error("top_k_eigs: k=" + std::to_string(k) + " is outside [1, " + std::to_string(n) + "]");
  if (!S.allFinite()) throw Error("top_k_eigs: matrix contains NaN or Inf");

  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  double asym = 0.0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < j; ++i) asym = std::max(asym, std::abs(S(i, j) - S(j, i)));
  if (asym > 1e-10 * scale)
    throw Error("top_k_eigs: matrix is not symmetric (max deviation " + std::to_string(asym) + ")");

  // Tridiagonalization followed by implicit symmetric QR; eigenvalues
  // ascend, so the top k are the trailing columns.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error("top_k_eigs: eigendecomposition failed to converge");

  Embedding out;
  out.vectors.resize(n, k);
  out.values.resize(k);
  for (Index i = 0; i < k; ++i) {
    const Index src = n - 1 - i;
    out.values(i) = solver.eigenvalues()(src);
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0.0) v = -v;
    out.vectors.col(i) = v;
  }
  return out;
}

double relaxed_kernel_objective(const Eigen::MatrixXd& S, const Eigen::MatrixXd& H) {
  if (S.rows() != H.rows()) throw Error("relaxed_kernel_objective: shape mismatch");
  return S.trace() - (S * H).cwiseProduct(H).sum();
}

}  // namespace mkkm
