#pragma once

#include "mkkm/kernels.hpp"
#include "mkkm/relations.hpp"
#include "mkkm/simplex_qp.hpp"
#include "mkkm/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mkkm {

/// Hard cluster assignment in label form.
struct Partition {
  std::vector<int> labels;
  int k = 0;
  /// Set when Lloyd iterations had to repair an empty cluster.
  bool had_empty_clusters = false;

  std::size_t n() const { return labels.size(); }
};

struct KMeansResult {
  Partition partition;
  Eigen::MatrixXd centroids;
  /// Within-cluster sum of squares after each centroid update.
  std::vector<double> wcss_trace;
  double wcss = 0.0;
  int iterations = 0;
};

inline constexpr int kKMeansMaxIterations = 300;

/// Lloyd iterations from k-means++ seeding on the rows of `points`, until
/// the assignment stops changing or `max_iterations` is reached. Empty
/// clusters are refilled with the point farthest from its centroid.
KMeansResult kmeans_detailed(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                             int max_iterations = kKMeansMaxIterations);
Partition kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed);

/// k-means on the rows of H, optionally scaled to unit length first.
Partition discretize(const Embedding& embedding, int k, std::uint64_t seed, bool row_normalize = false);

/// Kernel k-means via the spectral relaxation: top-k eigenvectors of K,
/// then k-means on their rows.
Partition kkm(const GramMatrix& K, int k, std::uint64_t seed, bool row_normalize = false);

/// State handed to an observer after every outer iteration.
struct IterationState {
  int iteration = 0;
  const Embedding* embedding = nullptr;
  const WeightVector* weights = nullptr;
  /// Only set for kcd_mkkm.
  const RepresentationMatrix* representation = nullptr;
  double objective = 0.0;
};
using IterationObserver = std::function<void(const IterationState&)>;

/// Options shared by the alternating algorithms.
struct AlternatingOptions {
  int k = 2;
  std::uint64_t seed = 0;
  /// Stop once |f(t+1) - f(t)| <= epsilon. Defaults to 1e-6 * |f(1)|.
  std::optional<double> epsilon;
  int max_outer_iters = 50;
  bool row_normalize = false;
  QpOptions qp;
  IterationObserver observer;
};

struct KcdConfig : AlternatingOptions {
  double alpha = 0.5;
  double beta = 1.0 / 256.0;
};

/// Output of every alternating algorithm. `representation` is empty for
/// the single-weight-vector baselines.
struct KcdResult {
  WeightVector weights;
  RepresentationMatrix representation;
  Embedding embedding;
  Partition partition;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  /// Inner QP solves that hit their iteration cap.
  int qp_unconverged = 0;
  /// Negative entries of B clamped to zero across all iterations.
  int b_clamps = 0;
  std::vector<std::string> warnings;
};

/// B(p) = Tr(Kp (I - H H^T)) for every kernel.
Eigen::VectorXd kernel_residuals(const KernelBank& bank, const Eigen::MatrixXd& H);

/// Alternates the spectral H-step with the diagonal weight QP.
KcdResult mkkm(const KernelBank& bank, const AlternatingOptions& options);

/// MKKM with the w^T M w penalty; the weight step minimizes
/// 1/2 w^T (2B + lambda M) w.
KcdResult mkkm_mr(const KernelBank& bank, const Eigen::MatrixXd& correlation, double lambda,
                  const AlternatingOptions& options);

/// Kernel k-means on the uniform kernel average.
Partition a_mkkm(const KernelBank& bank, int k, std::uint64_t seed, bool row_normalize = false);

struct SingleBestResult {
  Partition partition;
  std::size_t best_index = 0;
  double accuracy = 0.0;
};

/// Runs kkm per kernel and keeps the one with the highest accuracy against
/// `truth` (lowest index on ties).
SingleBestResult sb_kkm(const KernelBank& bank, int k, const std::vector<int>& truth, std::uint64_t seed,
                        bool row_normalize = false);

/// Kernel correlation-dissimilarity MKKM. Per outer iteration:
/// K_Y = sum w_p^2 K_p, H = top-k eigenvectors of K_Y, Y = argmin of
/// (1/m^2)(Y1)^T (B + alpha M)(Y1) + beta Tr(D^T Y), w = Y1/m.
/// The objective Tr(K_Y (I - HH^T)) + alpha w^T M w + beta Tr(D^T Y) is
/// recorded after every sweep.
KcdResult kcd_mkkm(const KernelBank& bank, const RelationMatrices& relations, const KcdConfig& config);

}  // namespace mkkm
