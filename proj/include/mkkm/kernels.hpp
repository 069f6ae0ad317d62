#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mkkm {

/// d x n data matrix; each column is one sample.
using FeatureMatrix = Eigen::MatrixXd;

enum class KernelFamily { gaussian, polynomial, cosine, precomputed };

/// Kernel family plus its parameters. Gaussian kernels use only `c`,
/// polynomial kernels use only `a` and `b`, cosine and precomputed none.
struct KernelSpec {
  KernelFamily family = KernelFamily::precomputed;
  double c = 0.0;
  double a = 0.0;
  int b = 0;

  static KernelSpec gaussian(double c);
  static KernelSpec polynomial(double a, int b);
  static KernelSpec cosine();
  static KernelSpec precomputed();

  /// Short stable identifier, e.g. "gaussian_c0.05" or "poly_a1_b4".
  std::string label() const;

  bool operator==(const KernelSpec&) const = default;
};

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// An n x n symmetric kernel matrix with its provenance.
struct GramMatrix {
  Eigen::MatrixXd values;
  KernelSpec spec;
  bool normalized = false;
  bool scaled = false;

  Eigen::Index n() const { return values.rows(); }
};

/// Ordered base kernels over one sample set.
struct KernelBank {
  std::vector<GramMatrix> kernels;

  std::size_t size() const { return kernels.size(); }
  bool empty() const { return kernels.empty(); }
  Eigen::Index n() const { return kernels.empty() ? 0 : kernels.front().n(); }
  const GramMatrix& operator[](std::size_t p) const { return kernels[p]; }
};

/// Gaussian bandwidth multipliers of the standard bank, ascending.
inline constexpr double kStandardGaussianC[] = {0.01, 0.05, 0.1, 1.0, 10.0, 50.0, 100.0};

/// Rejects NaN/Inf entries and empty matrices.
void validate_features(const FeatureMatrix& X);

/// Largest |K(i,j) - K(j,i)|; throws if K is not square.
double max_asymmetry(const Eigen::MatrixXd& K);

/// exp(-|xi - xj|^2 / (2 sigma^2)) with sigma = c * (largest pairwise
/// distance). Throws "degenerate bandwidth" when all samples coincide.
GramMatrix gaussian_gram(const FeatureMatrix& X, double c);

/// (a + xi.xj)^b.
GramMatrix polynomial_gram(const FeatureMatrix& X, double a, int b);

/// xi.xj / (|xi| |xj|). Throws on a zero-norm sample.
GramMatrix cosine_gram(const FeatureMatrix& X);

/// K(i,j) / sqrt(K(i,i) K(j,j)); the diagonal is set to exactly 1.
GramMatrix normalize_gram(const GramMatrix& K);

/// Entrywise min-max map of the whole matrix onto [0, 1].
GramMatrix scale_gram(const GramMatrix& K);

/// The 12-kernel recipe: 7 Gaussian kernels (c ascending), 4 polynomial
/// kernels in (a,b) order (0,2),(0,4),(1,2),(1,4), then the cosine kernel.
/// Each kernel is normalized and/or scaled according to the flags.
KernelBank standard_bank(const FeatureMatrix& X, bool normalize = true, bool scale = true);

/// Specs of the standard bank in bank order.
std::vector<KernelSpec> standard_specs();

/// sum_p w_p^2 K_p.
GramMatrix combine(const KernelBank& bank, const Eigen::VectorXd& w);

/// Throws unless every kernel is square, shares n, and is symmetric within
/// `tolerance`.
void validate_bank(const KernelBank& bank, double tolerance = 1e-8);

}  // namespace mkkm
