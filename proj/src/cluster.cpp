#include "mkkm/cluster.hpp"

#include "mkkm/error.hpp"
#include "mkkm/metrics.hpp"

#include <cmath>
#include <sstream>

namespace mkkm {

using Eigen::Index;

Partition kkm(const GramMatrix& K, int k, std::uint64_t seed, bool row_normalize) {
  return discretize(top_k_eigs(K.values, k), k, seed, row_normalize);
}

Eigen::VectorXd kernel_residuals(const KernelBank& bank, const Eigen::MatrixXd& H) {
  Eigen::VectorXd B(static_cast<Index>(bank.size()));
  for (std::size_t p = 0; p < bank.size(); ++p)
    B(static_cast<Index>(p)) = relaxed_kernel_objective(bank[p].values, H);
  return B;
}

Partition a_mkkm(const KernelBank& bank, int k, std::uint64_t seed, bool row_normalize) {
  if (bank.empty()) throw Error("a_mkkm: empty kernel bank");
  GramMatrix average;
  average.values = Eigen::MatrixXd::Zero(bank.n(), bank.n());
  const double share = 1.0 / static_cast<double>(bank.size());
  for (const auto& K : bank.kernels) average.values.noalias() += share * K.values;
  return kkm(average, k, seed, row_normalize);
}

SingleBestResult sb_kkm(const KernelBank& bank, int k, const std::vector<int>& truth, std::uint64_t seed,
                        bool row_normalize) {
  if (bank.empty()) throw Error("sb_kkm: empty kernel bank");
  if (truth.size() != static_cast<std::size_t>(bank.n()))
    throw Error("sb_kkm: ground truth has " + std::to_string(truth.size()) + " labels, kernels have " +
                std::to_string(bank.n()) + " samples");
  SingleBestResult best;
  best.accuracy = -1.0;
  for (std::size_t p = 0; p < bank.size(); ++p) {
    Partition part = kkm(bank[p], k, seed, row_normalize);
    const double acc = accuracy(part.labels, truth);
    if (acc > best.accuracy) {
      best.accuracy = acc;
      best.best_index = p;
      best.partition = std::move(part);
    }
  }
  return best;
}

namespace {

void check_options(const KernelBank& bank, const AlternatingOptions& options) {
  validate_bank(bank);
  if (options.k < 1 || options.k > bank.n())
    throw Error("k=" + std::to_string(options.k) + " must lie in [1, n=" + std::to_string(bank.n()) + "]");
  if (options.max_outer_iters < 1) throw Error("max_outer_iters must be positive");
  if (options.epsilon && !(*options.epsilon >= 0.0)) throw Error("epsilon must be nonnegative");
}

int clamp_negative(Eigen::VectorXd& B) {
  int clamped = 0;
  for (Index p = 0; p < B.size(); ++p)
    if (B(p) < 0.0) {
      B(p) = 0.0;
      ++clamped;
    }
  return clamped;
}

// Shared outer loop. `weight_step` receives the current H-derived residuals
// B and returns the objective after updating its own weight state; it is
// also responsible for writing the new weights into `w`.
template <typename WeightStep, typename Objective>
KcdResult alternate(const KernelBank& bank, const AlternatingOptions& options, Eigen::VectorXd w,
                    WeightStep&& weight_step, Objective&& objective, const RepresentationMatrix* representation) {
  KcdResult result;
  double previous = 0.0;
  double epsilon = options.epsilon.value_or(0.0);

  for (int t = 1; t <= options.max_outer_iters; ++t) {
    const GramMatrix combined = combine(bank, w);
    result.embedding = top_k_eigs(combined.values, options.k);
    const Eigen::VectorXd B = kernel_residuals(bank, result.embedding.vectors);

    weight_step(B, w, result);
    const double f = objective(B, w);
    if (!std::isfinite(f)) throw Error("numerical divergence: objective is not finite at iteration " + std::to_string(t));

    result.objective_trace.push_back(f);
    result.iterations = t;
    if (t == 1 && !options.epsilon) epsilon = 1e-6 * std::abs(f);
    if (options.observer) {
      IterationState state;
      state.iteration = t;
      state.embedding = &result.embedding;
      state.weights = &w;
      state.representation = representation;
      state.objective = f;
      options.observer(state);
    }
    if (std::abs(f - previous) <= epsilon) {
      result.converged = true;
      break;
    }
    previous = f;
  }

  result.weights = std::move(w);
  result.partition = discretize(result.embedding, options.k, options.seed, options.row_normalize);
  return result;
}

// Solves the weight QP on clamped residuals; if clamping changed the
// problem and the new weights are worse under the true objective, the
// previous weights are kept so the trace stays monotone.
template <typename TrueObjective>
void weight_qp_step(const Eigen::MatrixXd& A, int clamped, const QpOptions& qp, Eigen::VectorXd& w,
                    KcdResult& result, TrueObjective&& true_objective) {
  const QpSolution sol = solve_weight_qp_detailed(A, qp);
  if (!sol.converged) ++result.qp_unconverged;
  Eigen::VectorXd next = sol.x.col(0);
  if (clamped > 0 && true_objective(next) > true_objective(w)) return;
  w = std::move(next);
}

}  // namespace

KcdResult mkkm(const KernelBank& bank, const AlternatingOptions& options) {
  check_options(bank, options);
  const Index m = static_cast<Index>(bank.size());
  const Eigen::VectorXd w0 = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));

  auto objective = [](const Eigen::VectorXd& B, const Eigen::VectorXd& w) {
    return w.cwiseProduct(w).dot(B);
  };
  auto step = [&](const Eigen::VectorXd& B, Eigen::VectorXd& w, KcdResult& result) {
    Eigen::VectorXd Bc = B;
    const int clamped = clamp_negative(Bc);
    result.b_clamps += clamped;
    const Eigen::MatrixXd A = (2.0 * Bc).asDiagonal();
    weight_qp_step(A, clamped, options.qp, w, result, [&](const Eigen::VectorXd& v) { return objective(B, v); });
  };
  return alternate(bank, options, w0, step, objective, nullptr);
}

KcdResult mkkm_mr(const KernelBank& bank, const Eigen::MatrixXd& correlation, double lambda,
                  const AlternatingOptions& options) {
  check_options(bank, options);
  const Index m = static_cast<Index>(bank.size());
  if (correlation.rows() != m || correlation.cols() != m)
    throw Error("mkkm_mr: correlation matrix does not match the bank size");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("mkkm_mr: lambda must be nonnegative");
  const Eigen::VectorXd w0 = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));

  auto objective = [&](const Eigen::VectorXd& B, const Eigen::VectorXd& w) {
    return w.cwiseProduct(w).dot(B) + 0.5 * lambda * w.dot(correlation * w);
  };
  auto step = [&](const Eigen::VectorXd& B, Eigen::VectorXd& w, KcdResult& result) {
    Eigen::VectorXd Bc = B;
    const int clamped = clamp_negative(Bc);
    result.b_clamps += clamped;
    Eigen::MatrixXd A = (2.0 * Bc).asDiagonal();
    A += lambda * correlation;
    weight_qp_step(A, clamped, options.qp, w, result, [&](const Eigen::VectorXd& v) { return objective(B, v); });
  };
  return alternate(bank, options, w0, step, objective, nullptr);
}

KcdResult kcd_mkkm(const KernelBank& bank, const RelationMatrices& relations, const KcdConfig& config) {
  check_options(bank, config);
  const Index m = static_cast<Index>(bank.size());
  if (relations.correlation.rows() != m || relations.correlation.cols() != m ||
      relations.dissimilarity.rows() != m || relations.dissimilarity.cols() != m)
    throw Error("kcd_mkkm: relation matrices do not match the kernel bank (m=" + std::to_string(m) + ")");
  if (!(config.alpha >= 0.0) || !std::isfinite(config.alpha)) throw Error("kcd_mkkm: alpha must be nonnegative");
  if (!(config.beta >= 0.0) || !std::isfinite(config.beta)) throw Error("kcd_mkkm: beta must be nonnegative");

  std::vector<std::string> warnings;
  if (config.alpha < 0.1 || config.alpha > 0.9) {
    std::ostringstream os;
    os << "alpha=" << config.alpha << " lies outside the tuning grid [0.1, 0.9]";
    warnings.push_back(os.str());
  }
  if (config.beta < std::ldexp(1.0, -14) || config.beta > std::ldexp(1.0, -5)) {
    std::ostringstream os;
    os << "beta=" << config.beta << " lies outside the tuning grid [2^-14, 2^-5]";
    warnings.push_back(os.str());
  }

  const Eigen::MatrixXd& M = relations.correlation;
  const Eigen::MatrixXd& D = relations.dissimilarity;
  RepresentationMatrix Y = RepresentationMatrix::Constant(m, m, 1.0 / static_cast<double>(m));
  const Eigen::VectorXd w0 = induced_weights(Y);

  auto full_objective = [&](const Eigen::VectorXd& B, const RepresentationMatrix& Yc) {
    const Eigen::VectorXd w = induced_weights(Yc);
    return w.cwiseProduct(w).dot(B) + config.alpha * w.dot(M * w) + config.beta * D.cwiseProduct(Yc).sum();
  };
  auto objective = [&](const Eigen::VectorXd& B, const Eigen::VectorXd&) { return full_objective(B, Y); };
  auto step = [&](const Eigen::VectorXd& B, Eigen::VectorXd& w, KcdResult& result) {
    Eigen::VectorXd Bc = B;
    const int clamped = clamp_negative(Bc);
    result.b_clamps += clamped;
    QpProblem problem;
    problem.quadratic = Bc.asDiagonal();
    problem.quadratic += config.alpha * M;
    problem.linear = D;
    problem.beta = config.beta;
    problem.mode = QpMode::column_stochastic;
    const QpSolution sol = solve_y_qp(problem, Y, config.qp);
    if (!sol.converged) ++result.qp_unconverged;
    if (!(clamped > 0 && full_objective(B, sol.x) > full_objective(B, Y))) Y = sol.x;
    w = induced_weights(Y);
  };

  KcdResult result = alternate(bank, config, w0, step, objective, &Y);
  result.representation = std::move(Y);
  result.warnings = std::move(warnings);
  if (result.b_clamps > 0)
    result.warnings.push_back("clamped " + std::to_string(result.b_clamps) + " negative kernel residual(s) to zero");
  return result;
}

}  // namespace mkkm
