#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>

namespace mkkm {

/// Nonnegative weights summing to one.
using WeightVector = Eigen::VectorXd;

/// m x m nonnegative matrix with unit column sums. Its row means are the
/// kernel weights.
using RepresentationMatrix = Eigen::MatrixXd;

enum class QpMode { vector_simplex, column_stochastic };

/// Convex QP over a product of probability simplices.
///
/// column_stochastic: minimize (1/m^2) (Y1)^T A (Y1) + beta <D, Y>
///   over m x m matrices Y >= 0 with 1^T Y = 1^T.
/// vector_simplex: minimize w^T A w over the simplex (linear/beta unused).
struct QpProblem {
  Eigen::MatrixXd quadratic;  // A, symmetric PSD
  Eigen::MatrixXd linear;     // D, same shape as Y (column_stochastic only)
  double beta = 0.0;
  QpMode mode = QpMode::column_stochastic;
};

struct QpOptions {
  int max_iterations = 10000;
  /// Stop a gradient phase when (f_old - f_new) / max(1, |f|) falls below this.
  double relative_decrease_tol = 1e-10;
  /// Converged when the Frank-Wolfe gap is below kkt_tol * max(1, |f|).
  double kkt_tol = 1e-8;
  /// Exact solve on the identified face after each gradient phase.
  bool polish = true;
  /// Called with every accepted iterate (tests use it to check feasibility).
  std::function<void(const Eigen::MatrixXd&)> on_iterate;
};

struct QpSolution {
  /// m x c; c = 1 in vector mode.
  Eigen::MatrixXd x;
  double objective = 0.0;
  /// Frank-Wolfe duality gap at x; bounds f(x) - f*.
  double kkt_residual = 0.0;
  int iterations = 0;
  /// False when the iteration cap was hit; x is still the best iterate.
  bool converged = false;
};

/// Euclidean projection onto {x >= 0, sum x = 1}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

/// Throws "nonconvex QP rejected" unless A is symmetric with smallest
/// eigenvalue >= -1e-8 * trace(A)/m.
void require_psd(const Eigen::MatrixXd& A);

/// argmin over the simplex of w^T A w.
WeightVector solve_weight_qp(const Eigen::MatrixXd& A, const QpOptions& options = {});
QpSolution solve_weight_qp_detailed(const Eigen::MatrixXd& A, const QpOptions& options = {});

/// Solves the column-stochastic problem. Starts from `initial` when given
/// (it must be feasible), otherwise from the uniform matrix ones/m.
/// Every iterate stays feasible and the objective never increases from the
/// starting point.
QpSolution solve_y_qp(const QpProblem& problem, const std::optional<Eigen::MatrixXd>& initial = std::nullopt,
                      const QpOptions& options = {});

/// (1/m^2) (Y1)^T A (Y1) + beta * sum(D .* Y).
double y_objective(const Eigen::MatrixXd& Y, const QpProblem& problem);

/// Gradient of y_objective: G(p,q) = (2/m^2) (A Y1)_p + beta D(p,q).
Eigen::MatrixXd y_gradient(const Eigen::MatrixXd& Y, const QpProblem& problem);

/// w = Y 1 / m.
WeightVector induced_weights(const RepresentationMatrix& Y);

}  // namespace mkkm
