#include "mkkm/cluster.hpp"

#include "mkkm/error.hpp"
#include "mkkm/random.hpp"

#include <limits>

namespace mkkm {

using Eigen::Index;

namespace {

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
  const Index n = points.rows();
  Eigen::MatrixXd centers(k, points.cols());

  auto pick_uniform = [&] { return std::min<Index>(static_cast<Index>(uniform01(rng) * static_cast<double>(n)), n - 1); };

  centers.row(0) = points.row(pick_uniform());
  Eigen::VectorXd dist(n);
  for (Index i = 0; i < n; ++i) dist(i) = (points.row(i) - centers.row(0)).squaredNorm();

  for (int c = 1; c < k; ++c) {
    const double total = dist.sum();
    Index chosen = n - 1;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double cumulative = 0.0;
      for (Index i = 0; i < n; ++i) {
        cumulative += dist(i);
        if (cumulative > target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick_uniform();
    }
    centers.row(c) = points.row(chosen);
    for (Index i = 0; i < n; ++i) dist(i) = std::min(dist(i), (points.row(i) - centers.row(c)).squaredNorm());
  }
  return centers;
}

// Returns true if any label changed.
bool assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers, std::vector<int>& labels) {
  bool changed = false;
  for (Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centers.rows(); ++c) {
      const double d = (points.row(i) - centers.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    if (labels[static_cast<std::size_t>(i)] != best) {
      labels[static_cast<std::size_t>(i)] = best;
      changed = true;
    }
  }
  return changed;
}

// Moves the point farthest from its current center into each empty
// cluster. Returns true if any repair happened.
bool repair_empty(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers, std::vector<int>& labels, int k) {
  bool repaired = false;
  for (int c = 0; c < k; ++c) {
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    Index far = -1;
    double far_d = -1.0;
    for (Index i = 0; i < points.rows(); ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(l)] < 2) continue;
      const double d = (points.row(i) - centers.row(l)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) break;
    labels[static_cast<std::size_t>(far)] = c;
    repaired = true;
  }
  return repaired;
}

Eigen::MatrixXd update_centers(const Eigen::MatrixXd& points, const std::vector<int>& labels, int k,
                               const Eigen::MatrixXd& previous) {
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(k, points.cols());
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (Index i = 0; i < points.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    centers.row(l) += points.row(i);
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0)
      centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    else
      centers.row(c) = previous.row(c);
  }
  return centers;
}

double wcss(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers, const std::vector<int>& labels) {
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i)
    total += (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return total;
}

}  // namespace

KMeansResult kmeans_detailed(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int max_iterations) {
  const Index n = points.rows();
  if (k < 1) throw Error("kmeans: k must be at least 1");
  if (n < k) throw Error("kmeans: k=" + std::to_string(k) + " exceeds the number of points " + std::to_string(n));
  if (!points.allFinite()) throw Error("kmeans: points contain NaN or Inf");

  std::mt19937_64 rng(seed);
  KMeansResult out;
  Eigen::MatrixXd centers = seed_plus_plus(points, k, rng);
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  assign(points, centers, labels);

  for (int it = 0; it < max_iterations; ++it) {
    if (repair_empty(points, centers, labels, k)) out.partition.had_empty_clusters = true;
    centers = update_centers(points, labels, k, centers);
    out.wcss_trace.push_back(wcss(points, centers, labels));
    ++out.iterations;
    if (!assign(points, centers, labels)) break;
  }

  out.partition.labels = std::move(labels);
  out.partition.k = k;
  out.centroids = std::move(centers);
  out.wcss = out.wcss_trace.back();
  return out;
}

Partition kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed) {
  return kmeans_detailed(points, k, seed).partition;
}

Partition discretize(const Embedding& embedding, int k, std::uint64_t seed, bool row_normalize) {
  if (!row_normalize) return kmeans(embedding.vectors, k, seed);
  Eigen::MatrixXd rows = embedding.vectors;
  for (Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    if (norm > 0.0) rows.row(i) /= norm;
  }
  return kmeans(rows, k, seed);
}

}  // namespace mkkm
