#include "mkkm/kernels.hpp"

#include "mkkm/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mkkm {

namespace {

using Eigen::Index;

// Fills the upper triangle via `entry(i, j)` and mirrors it, so every
// produced matrix is exactly symmetric.
template <typename Fn>
Eigen::MatrixXd symmetric_from(Index n, Fn&& entry) {
  Eigen::MatrixXd K(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = entry(i, j);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

KernelSpec KernelSpec::gaussian(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error("gaussian kernel: c must be positive");
  return {KernelFamily::gaussian, c, 0.0, 0};
}

KernelSpec KernelSpec::polynomial(double a, int b) {
  if (b < 1) throw Error("polynomial kernel: degree must be a positive integer");
  if (!std::isfinite(a)) throw Error("polynomial kernel: offset must be finite");
  return {KernelFamily::polynomial, 0.0, a, b};
}

KernelSpec KernelSpec::cosine() { return {KernelFamily::cosine, 0.0, 0.0, 0}; }

KernelSpec KernelSpec::precomputed() { return {KernelFamily::precomputed, 0.0, 0.0, 0}; }

std::string KernelSpec::label() const {
  switch (family) {
    case KernelFamily::gaussian:
      return "gaussian_c" + format_number(c);
    case KernelFamily::polynomial:
      return "poly_a" + format_number(a) + "_b" + std::to_string(b);
    case KernelFamily::cosine:
      return "cosine";
    case KernelFamily::precomputed:
      return "precomputed";
  }
  return "unknown";
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::polynomial: return "polynomial";
    case KernelFamily::cosine: return "cosine";
    case KernelFamily::precomputed: return "precomputed";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "polynomial") return KernelFamily::polynomial;
  if (name == "cosine") return KernelFamily::cosine;
  if (name == "precomputed") return KernelFamily::precomputed;
  throw Error("unknown kernel family '" + name + "'");
}

void validate_features(const FeatureMatrix& X) {
  if (X.size() == 0) throw Error("feature matrix is empty");
  if (!X.allFinite()) throw Error("feature matrix contains NaN or Inf");
}

double max_asymmetry(const Eigen::MatrixXd& K) {
  if (K.rows() != K.cols()) throw Error("kernel matrix is not square");
  double worst = 0.0;
  for (Index j = 0; j < K.cols(); ++j)
    for (Index i = 0; i < j; ++i) worst = std::max(worst, std::abs(K(i, j) - K(j, i)));
  return worst;
}

GramMatrix gaussian_gram(const FeatureMatrix& X, double c) {
  validate_features(X);
  const KernelSpec spec = KernelSpec::gaussian(c);
  const Index n = X.cols();
  if (n < 2) throw Error("gaussian kernel needs at least two samples");

  Eigen::MatrixXd sq = symmetric_from(n, [&](Index i, Index j) {
    return i == j ? 0.0 : (X.col(i) - X.col(j)).squaredNorm();
  });
  const double dmax = std::sqrt(sq.maxCoeff());
  if (!(dmax > 0.0)) throw Error("degenerate bandwidth: all samples are identical");

  const double sigma = c * dmax;
  const double denom = 2.0 * sigma * sigma;
  GramMatrix K;
  K.values = symmetric_from(n, [&](Index i, Index j) { return i == j ? 1.0 : std::exp(-sq(i, j) / denom); });
  K.spec = spec;
  return K;
}

GramMatrix polynomial_gram(const FeatureMatrix& X, double a, int b) {
  validate_features(X);
  const KernelSpec spec = KernelSpec::polynomial(a, b);
  const Eigen::MatrixXd inner = X.transpose() * X;
  GramMatrix K;
  K.values = symmetric_from(X.cols(), [&](Index i, Index j) { return std::pow(a + inner(i, j), b); });
  K.spec = spec;
  return K;
}

GramMatrix cosine_gram(const FeatureMatrix& X) {
  validate_features(X);
  const Eigen::VectorXd norms = X.colwise().norm().transpose();
  for (Index i = 0; i < norms.size(); ++i)
    if (!(norms(i) > 0.0)) throw Error("zero vector in cosine kernel (sample " + std::to_string(i) + ")");
  const Eigen::MatrixXd inner = X.transpose() * X;
  GramMatrix K;
  K.values = symmetric_from(X.cols(), [&](Index i, Index j) {
    if (i == j) return 1.0;
    return std::clamp(inner(i, j) / (norms(i) * norms(j)), -1.0, 1.0);
  });
  K.spec = KernelSpec::cosine();
  return K;
}

GramMatrix normalize_gram(const GramMatrix& K) {
  const Index n = K.n();
  if (K.values.cols() != n) throw Error("kernel matrix is not square");
  const Eigen::VectorXd diag = K.values.diagonal();
  for (Index i = 0; i < n; ++i)
    if (!(diag(i) > 0.0) || !std::isfinite(diag(i)))
      throw Error("non-normalizable kernel: diagonal entry " + std::to_string(i) + " is not positive");

  GramMatrix out = K;
  out.values = symmetric_from(n, [&](Index i, Index j) {
    if (i == j) return 1.0;
    return K.values(i, j) / std::sqrt(diag(i) * diag(j));
  });
  out.normalized = true;
  return out;
}

GramMatrix scale_gram(const GramMatrix& K) {
  if (K.values.size() == 0) throw Error("cannot scale an empty kernel");
  if (!K.values.allFinite()) throw Error("kernel contains NaN or Inf");
  const double lo = K.values.minCoeff();
  const double hi = K.values.maxCoeff();
  if (!(hi > lo)) throw Error("degenerate scaling range: kernel is constant");
  const double range = hi - lo;

  GramMatrix out = K;
  out.values = symmetric_from(K.n(), [&](Index i, Index j) {
    return std::clamp((K.values(i, j) - lo) / range, 0.0, 1.0);
  });
  out.scaled = true;
  return out;
}

std::vector<KernelSpec> standard_specs() {
  std::vector<KernelSpec> specs;
  for (double c : kStandardGaussianC) specs.push_back(KernelSpec::gaussian(c));
  for (auto [a, b] : {std::pair{0.0, 2}, std::pair{0.0, 4}, std::pair{1.0, 2}, std::pair{1.0, 4}})
    specs.push_back(KernelSpec::polynomial(a, b));
  specs.push_back(KernelSpec::cosine());
  return specs;
}

KernelBank standard_bank(const FeatureMatrix& X, bool normalize, bool scale) {
  validate_features(X);
  KernelBank bank;
  for (const KernelSpec& spec : standard_specs()) {
    GramMatrix K;
    switch (spec.family) {
      case KernelFamily::gaussian: K = gaussian_gram(X, spec.c); break;
      case KernelFamily::polynomial: K = polynomial_gram(X, spec.a, spec.b); break;
      case KernelFamily::cosine: K = cosine_gram(X); break;
      case KernelFamily::precomputed: break;
    }
    if (normalize) K = normalize_gram(K);
    if (scale) K = scale_gram(K);
    bank.kernels.push_back(std::move(K));
  }
  return bank;
}

GramMatrix combine(const KernelBank& bank, const Eigen::VectorXd& w) {
  if (bank.empty()) throw Error("combine: empty kernel bank");
  if (static_cast<std::size_t>(w.size()) != bank.size())
    throw Error("combine: weight vector has length " + std::to_string(w.size()) + ", bank has " +
                std::to_string(bank.size()) + " kernels");
  if (!w.allFinite()) throw Error("combine: weights must be finite");

  GramMatrix out;
  out.values = Eigen::MatrixXd::Zero(bank.n(), bank.n());
  for (std::size_t p = 0; p < bank.size(); ++p) {
    const double scale = w(static_cast<Index>(p)) * w(static_cast<Index>(p));
    if (scale != 0.0) out.values.noalias() += scale * bank[p].values;
  }
  return out;
}

void validate_bank(const KernelBank& bank, double tolerance) {
  if (bank.empty()) throw Error("kernel bank is empty");
  const Index n = bank.n();
  for (std::size_t p = 0; p < bank.size(); ++p) {
    const auto& K = bank[p].values;
    if (K.rows() != n || K.cols() != n)
      throw Error("kernel " + std::to_string(p) + " has shape " + std::to_string(K.rows()) + "x" +
                  std::to_string(K.cols()) + ", expected " + std::to_string(n) + "x" + std::to_string(n));
    if (!K.allFinite()) throw Error("kernel " + std::to_string(p) + " contains NaN or Inf");
    const double dev = max_asymmetry(K);
    if (dev > tolerance)
      throw Error("kernel " + std::to_string(p) + " is not symmetric (max deviation " + std::to_string(dev) + ")");
  }
}

}  // namespace mkkm
