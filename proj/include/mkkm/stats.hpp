#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace mkkm {

/// Per-dataset ranks of k algorithms (1 = best, ties averaged).
struct RankTable {
  Eigen::MatrixXd ranks;  // n_datasets x k_algorithms
  Eigen::VectorXd mean_ranks;

  Eigen::Index n_datasets() const { return ranks.rows(); }
  Eigen::Index k_algorithms() const { return ranks.cols(); }
};

/// Ranks 1..k; tied scores share the average of their positions.
Eigen::VectorXd rank_row(const Eigen::VectorXd& scores, bool higher_is_better);

/// Ranks every row of a datasets x algorithms score matrix.
RankTable rank_table(const Eigen::MatrixXd& scores, bool higher_is_better);

/// Builds a table directly from precomputed ranks; rows must be valid
/// tie-averaged rankings.
RankTable rank_table_from_ranks(const Eigen::MatrixXd& ranks);

struct FriedmanResult {
  double chi2 = 0.0;
  double f = 0.0;
};

/// tau_chi2 = 12n / (k(k+1)) * (sum r_i^2 - k(k+1)^2 / 4) and
/// tau_F = (n-1) tau_chi2 / (n(k-1) - tau_chi2), r_i the mean ranks.
FriedmanResult friedman(const RankTable& table);

/// Same statistics from mean ranks alone.
FriedmanResult friedman_from_mean_ranks(const Eigen::VectorXd& mean_ranks, Eigen::Index n_datasets);

/// q * sqrt(k(k+1) / (6n)).
double nemenyi_cd(int k, int n, double q);

/// Default studentized-range critical value q_0.05 for k = 8 algorithms.
inline constexpr double kQ005For8 = 3.031;

/// Pairs (i, j), i < j, whose mean-rank gap exceeds `cd`.
std::vector<std::pair<int, int>> significant_pairs(const Eigen::VectorXd& mean_ranks, double cd);

}  // namespace mkkm
