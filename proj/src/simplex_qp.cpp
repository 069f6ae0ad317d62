#include "mkkm/simplex_qp.hpp"

#include "mkkm/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace mkkm {

using Eigen::Index;

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const Index m = v.size();
  if (m == 0) throw Error("project_simplex: empty vector");
  if (!v.allFinite()) throw Error("project_simplex: vector contains NaN or Inf");

  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < m; ++j) {
    cumulative += u[static_cast<std::size_t>(j)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - candidate > 0.0) theta = candidate;
  }
  Eigen::VectorXd x = (v.array() - theta).max(0.0).matrix();
  // Renormalize away rounding drift so the sum is 1 to machine precision.
  const double total = x.sum();
  if (total > 0.0) x /= total;
  return x;
}

namespace {

struct Spectrum {
  double min;
  double max;
};

Spectrum symmetric_spectrum(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("QP: eigenvalue computation failed");
  return {solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
}

// f(X) = gamma * s^T A s + beta * <L, X>, s = X 1, each column of X on the
// simplex.
class ProductSimplexQp {
 public:
  ProductSimplexQp(const Eigen::MatrixXd& A, const Eigen::MatrixXd& L, double beta, double gamma)
      : A_(A), L_(L), beta_(beta), gamma_(gamma), has_linear_(beta != 0.0 && L.size() > 0) {}

  double objective(const Eigen::MatrixXd& X) const {
    const Eigen::VectorXd s = X.rowwise().sum();
    double f = gamma_ * s.dot(A_ * s);
    if (has_linear_) f += beta_ * L_.cwiseProduct(X).sum();
    return f;
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& X) const {
    const Eigen::VectorXd s = X.rowwise().sum();
    const Eigen::VectorXd As = (2.0 * gamma_) * (A_ * s);
    Eigen::MatrixXd G = As.replicate(1, X.cols());
    if (has_linear_) G += beta_ * L_;
    return G;
  }

  // Curvature of t -> f(X + t d): gamma * (d1)^T A (d1).
  double curvature(const Eigen::MatrixXd& d) const {
    const Eigen::VectorXd ds = d.rowwise().sum();
    return gamma_ * ds.dot(A_ * ds);
  }

  const Eigen::MatrixXd& A() const { return A_; }
  double gamma() const { return gamma_; }
  double beta() const { return has_linear_ ? beta_ : 0.0; }
  const Eigen::MatrixXd& linear() const { return L_; }

 private:
  const Eigen::MatrixXd& A_;
  const Eigen::MatrixXd& L_;
  double beta_;
  double gamma_;
  bool has_linear_;
};

Eigen::MatrixXd project_columns(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (Index q = 0; q < X.cols(); ++q) out.col(q) = project_simplex(X.col(q));
  return out;
}

// sum_q (sum_p X(p,q) G(p,q) - min_p G(p,q)) >= f(X) - f*.
double frank_wolfe_gap(const Eigen::MatrixXd& X, const Eigen::MatrixXd& G) {
  double gap = 0.0;
  for (Index q = 0; q < X.cols(); ++q) gap += X.col(q).dot(G.col(q)) - G.col(q).minCoeff();
  return std::max(gap, 0.0);
}

// Active-set passes on the face given by the support of X. Each pass
// moves toward the face minimizer (KKT step) or, when the face has none,
// along a zero-curvature descent direction; a step that hits a bound drops
// that coordinate from the support and the next pass starts from there.
void polish_on_face(const ProductSimplexQp& qp, Eigen::MatrixXd& X, double& f, const QpOptions& options) {
  const Index m = X.rows();
  const Index c = X.cols();
  const int max_rounds = static_cast<int>(2 * m * c + 8);
  const double two_gamma = 2.0 * qp.gamma();

  for (int round = 0; round < max_rounds; ++round) {
    std::vector<std::pair<Index, Index>> support;
    for (Index q = 0; q < c; ++q)
      for (Index p = 0; p < m; ++p)
        if (X(p, q) > 0.0) support.emplace_back(p, q);
    const Index ns = static_cast<Index>(support.size());
    const Eigen::MatrixXd G = qp.gradient(X);

    Eigen::MatrixXd H(ns, ns);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(c, ns);
    Eigen::VectorXd g(ns);
    for (Index r = 0; r < ns; ++r) {
      const auto [p, q] = support[static_cast<std::size_t>(r)];
      for (Index t = 0; t < ns; ++t) H(r, t) = two_gamma * qp.A()(p, support[static_cast<std::size_t>(t)].first);
      C(q, r) = 1.0;
      g(r) = G(p, q);
    }

    // Directions that keep every column sum fixed: d = Z u with Z an
    // orthonormal basis of null(C). Working in u avoids mixing the scale of
    // the Hessian with the unit constraint rows.
    Eigen::JacobiSVD<Eigen::MatrixXd> csvd(C, Eigen::ComputeFullV);
    const Index face_dim = ns - c;
    if (face_dim <= 0) return;
    const Eigen::MatrixXd Z = csvd.matrixV().rightCols(face_dim);
    const Eigen::MatrixXd R = Z.transpose() * H * Z;
    const Eigen::VectorXd rg = Z.transpose() * g;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (R + R.transpose()));
    const Eigen::VectorXd& lam = eig.eigenvalues();
    const Eigen::MatrixXd& V = eig.eigenvectors();
    const double lam_tol = 1e-12 * std::max(lam.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const Eigen::VectorXd coef = V.transpose() * rg;
    Eigen::VectorXd flat = Eigen::VectorXd::Zero(face_dim);
    Eigen::VectorXd newton = Eigen::VectorXd::Zero(face_dim);
    for (Index i = 0; i < face_dim; ++i) {
      if (lam(i) > lam_tol) newton(i) = -coef(i) / lam(i);
      else flat(i) = -coef(i);
    }
    // No minimizer on this face when the gradient has a component along a
    // zero-curvature direction: f is linear there, so follow it.
    const bool unbounded = flat.norm() > 1e-9 * std::max(rg.norm(), std::numeric_limits<double>::min());
    const Eigen::VectorXd step = Z * (V * (unbounded ? flat : newton));
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, c);
    for (Index r = 0; r < ns; ++r) {
      const auto [p, q] = support[static_cast<std::size_t>(r)];
      d(p, q) = step(r);
    }
    if (d.cwiseAbs().maxCoeff() <= 1e-15) return;
    const double slope = G.cwiseProduct(d).sum();
    if (!(slope < 0.0)) return;
    const double curv = qp.curvature(d);

    double t_max = std::numeric_limits<double>::infinity();
    Index block_p = -1, block_q = -1;
    for (Index q = 0; q < c; ++q)
      for (Index p = 0; p < m; ++p)
        if (d(p, q) < 0.0) {
          const double t = X(p, q) / -d(p, q);
          if (t < t_max) {
            t_max = t;
            block_p = p;
            block_q = q;
          }
        }
    const double t_star = curv > 0.0 ? -slope / (2.0 * curv) : std::numeric_limits<double>::infinity();
    const double t = std::min(t_star, t_max);
    if (!std::isfinite(t) || t <= 0.0) return;

    Eigen::MatrixXd next = X + t * d;
    const bool blocked = t == t_max && block_p >= 0;
    if (blocked) next(block_p, block_q) = 0.0;
    next = next.cwiseMax(0.0);
    for (Index q = 0; q < c; ++q) {
      const double total = next.col(q).sum();
      if (!(total > 0.0)) return;
      next.col(q) /= total;
    }
    const double fn = qp.objective(next);
    if (!(fn <= f)) return;
    X = std::move(next);
    f = fn;
    if (options.on_iterate) options.on_iterate(X);
    if (!blocked) return;
  }
}

QpSolution solve_product_simplex(const ProductSimplexQp& qp, Eigen::MatrixXd X, double lipschitz,
                                 const QpOptions& options) {
  QpSolution out;
  double f = qp.objective(X);
  const double step0 = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;
  int iterations = 0;
  bool converged = false;

  auto gap_ok = [&](const Eigen::MatrixXd& G) {
    return frank_wolfe_gap(X, G) <= options.kkt_tol * std::max(1.0, std::abs(f));
  };

  for (int phase = 0; phase < 256 && !converged; ++phase) {
    const double f_phase_start = f;
    // Once the support stops changing the remaining work is on one face,
    // which the polish step finishes directly.
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> support = X.array() > 0.0;
    int stable = 0;
    while (iterations < options.max_iterations) {
      const Eigen::MatrixXd G = qp.gradient(X);
      if (gap_ok(G)) {
        converged = true;
        break;
      }
      double step = step0;
      Eigen::MatrixXd next;
      double fn = f;
      bool accepted = false;
      for (int halving = 0; halving < 60; ++halving) {
        next = project_columns(X - step * G);
        const Eigen::MatrixXd delta = next - X;
        fn = qp.objective(next);
        const double model = f + G.cwiseProduct(delta).sum() + delta.squaredNorm() / (2.0 * step);
        if (fn <= model + 1e-15 * std::max(1.0, std::abs(f))) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      ++iterations;
      if (!accepted || !(fn <= f)) break;
      const double decrease = f - fn;
      X = std::move(next);
      f = fn;
      if (options.on_iterate) options.on_iterate(X);
      if (decrease / std::max(1.0, std::abs(f)) < options.relative_decrease_tol) break;
      const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> now = X.array() > 0.0;
      stable = (now == support).all() ? stable + 1 : 0;
      support = now;
      if (options.polish && stable >= 5) break;
    }
    if (converged) break;

    if (options.polish) polish_on_face(qp, X, f, options);
    if (gap_ok(qp.gradient(X))) {
      converged = true;
      break;
    }
    if (iterations >= options.max_iterations) break;
    if (!(f < f_phase_start)) {
      // No progress in a full phase: accept as converged to working precision.
      converged = frank_wolfe_gap(X, qp.gradient(X)) <= 1e-6 * std::max(1.0, std::abs(f));
      break;
    }
  }

  out.x = std::move(X);
  out.objective = f;
  out.kkt_residual = frank_wolfe_gap(out.x, qp.gradient(out.x));
  out.iterations = iterations;
  out.converged = converged;
  return out;
}

void require_square(const Eigen::MatrixXd& A, const char* what) {
  if (A.rows() != A.cols() || A.rows() == 0) throw Error(std::string(what) + ": matrix must be square and nonempty");
  if (!A.allFinite()) throw Error(std::string(what) + ": matrix contains NaN or Inf");
}

}  // namespace

void require_psd(const Eigen::MatrixXd& A) {
  require_square(A, "QP");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  double asym = 0.0;
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < j; ++i) asym = std::max(asym, std::abs(A(i, j) - A(j, i)));
  if (asym > 1e-10 * scale) throw Error("nonconvex QP rejected: quadratic term is not symmetric");
  const Spectrum spec = symmetric_spectrum(A);
  const double tol = 1e-8 * std::max(A.trace() / static_cast<double>(A.rows()), 0.0) +
                     64.0 * std::numeric_limits<double>::epsilon() * A.cwiseAbs().maxCoeff();
  if (spec.min < -tol)
    throw Error("nonconvex QP rejected: smallest eigenvalue " + std::to_string(spec.min) + " is negative");
}

QpSolution solve_weight_qp_detailed(const Eigen::MatrixXd& A, const QpOptions& options) {
  require_psd(A);
  const Index m = A.rows();
  const Eigen::MatrixXd none;
  ProductSimplexQp qp(A, none, 0.0, 1.0);
  const double lipschitz = 2.0 * std::max(symmetric_spectrum(A).max, 0.0);
  Eigen::MatrixXd start = Eigen::MatrixXd::Constant(m, 1, 1.0 / static_cast<double>(m));
  return solve_product_simplex(qp, std::move(start), lipschitz, options);
}

WeightVector solve_weight_qp(const Eigen::MatrixXd& A, const QpOptions& options) {
  return solve_weight_qp_detailed(A, options).x.col(0);
}

namespace {

void check_y_problem(const QpProblem& problem) {
  if (problem.mode != QpMode::column_stochastic) throw Error("solve_y_qp: problem must be column_stochastic");
  const Index m = problem.quadratic.rows();
  require_square(problem.quadratic, "solve_y_qp");
  if (!(problem.beta >= 0.0) || !std::isfinite(problem.beta)) throw Error("solve_y_qp: beta must be nonnegative");
  if (problem.linear.rows() != m || problem.linear.cols() != m)
    throw Error("solve_y_qp: linear cost must be " + std::to_string(m) + "x" + std::to_string(m));
  if (!problem.linear.allFinite()) throw Error("solve_y_qp: linear cost contains NaN or Inf");
}

}  // namespace

QpSolution solve_y_qp(const QpProblem& problem, const std::optional<Eigen::MatrixXd>& initial,
                      const QpOptions& options) {
  check_y_problem(problem);
  require_psd(problem.quadratic);
  const Index m = problem.quadratic.rows();
  const double gamma = 1.0 / static_cast<double>(m * m);
  ProductSimplexQp qp(problem.quadratic, problem.linear, problem.beta, gamma);

  Eigen::MatrixXd start;
  if (initial) {
    if (initial->rows() != m || initial->cols() != m) throw Error("solve_y_qp: initial Y has wrong shape");
    if ((initial->array() < 0.0).any() ||
        ((initial->colwise().sum().array() - 1.0).abs() > 1e-9).any())
      throw Error("solve_y_qp: initial Y is not column-stochastic");
    start = *initial;
  } else {
    start = Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
  }
  const double lipschitz = 2.0 * gamma * static_cast<double>(m) * std::max(symmetric_spectrum(problem.quadratic).max, 0.0);
  return solve_product_simplex(qp, std::move(start), lipschitz, options);
}

double y_objective(const Eigen::MatrixXd& Y, const QpProblem& problem) {
  const Index m = problem.quadratic.rows();
  if (Y.rows() != m || Y.cols() != m) throw Error("y_objective: Y shape does not match the problem");
  if (problem.beta != 0.0 && (problem.linear.rows() != m || problem.linear.cols() != m))
    throw Error("y_objective: linear cost shape does not match the problem");
  const Eigen::VectorXd s = Y.rowwise().sum();
  double f = s.dot(problem.quadratic * s) / static_cast<double>(m * m);
  if (problem.beta != 0.0) f += problem.beta * problem.linear.cwiseProduct(Y).sum();
  return f;
}

Eigen::MatrixXd y_gradient(const Eigen::MatrixXd& Y, const QpProblem& problem) {
  const Index m = problem.quadratic.rows();
  if (Y.rows() != m || Y.cols() != m) throw Error("y_gradient: Y shape does not match the problem");
  const Eigen::VectorXd s = Y.rowwise().sum();
  const Eigen::VectorXd As = (2.0 / static_cast<double>(m * m)) * (problem.quadratic * s);
  Eigen::MatrixXd G = As.replicate(1, m);
  if (problem.beta != 0.0) G += problem.beta * problem.linear;
  return G;
}

WeightVector induced_weights(const RepresentationMatrix& Y) {
  if (Y.cols() == 0) throw Error("induced_weights: empty matrix");
  return Y.rowwise().sum() / static_cast<double>(Y.cols());
}

}  // namespace mkkm
