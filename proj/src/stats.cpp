#include "mkkm/stats.hpp"

#include "mkkm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mkkm {

using Eigen::Index;

Eigen::VectorXd rank_row(const Eigen::VectorXd& scores, bool higher_is_better) {
  const Index k = scores.size();
  if (k == 0) throw Error("rank_row: empty score vector");
  if (!scores.allFinite()) throw Error("rank_row: scores must be finite");

  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return higher_is_better ? scores(a) > scores(b) : scores(a) < scores(b);
  });

  Eigen::VectorXd ranks(k);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores(order[j + 1]) == scores(order[i])) ++j;
    // Positions i..j (0-based) share rank ((i+1) + (j+1)) / 2.
    const double shared = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t t = i; t <= j; ++t) ranks(order[t]) = shared;
    i = j + 1;
  }
  return ranks;
}

RankTable rank_table(const Eigen::MatrixXd& scores, bool higher_is_better) {
  if (scores.rows() == 0 || scores.cols() == 0) throw Error("rank_table: empty score table");
  Eigen::MatrixXd ranks(scores.rows(), scores.cols());
  for (Index r = 0; r < scores.rows(); ++r) ranks.row(r) = rank_row(scores.row(r).transpose(), higher_is_better).transpose();
  return rank_table_from_ranks(ranks);
}

RankTable rank_table_from_ranks(const Eigen::MatrixXd& ranks) {
  if (ranks.rows() == 0 || ranks.cols() == 0) throw Error("rank table is empty");
  const double k = static_cast<double>(ranks.cols());
  const double expected = k * (k + 1.0) / 2.0;
  for (Index r = 0; r < ranks.rows(); ++r)
    if (std::abs(ranks.row(r).sum() - expected) > 1e-9)
      throw Error("rank table row " + std::to_string(r) + " does not sum to k(k+1)/2");
  RankTable t;
  t.ranks = ranks;
  t.mean_ranks = ranks.colwise().mean().transpose();
  return t;
}

FriedmanResult friedman_from_mean_ranks(const Eigen::VectorXd& mean_ranks, Index n_datasets) {
  const double k = static_cast<double>(mean_ranks.size());
  const double n = static_cast<double>(n_datasets);
  if (n_datasets < 2 || mean_ranks.size() < 2) throw Error("friedman: need at least 2 datasets and 2 algorithms");
  FriedmanResult out;
  out.chi2 = 12.0 * n / (k * (k + 1.0)) * (mean_ranks.squaredNorm() - k * (k + 1.0) * (k + 1.0) / 4.0);
  const double denom = n * (k - 1.0) - out.chi2;
  if (std::abs(denom) <= 1e-12 * n * (k - 1.0)) throw Error("degenerate F statistic: n(k-1) equals tau_chi2");
  out.f = (n - 1.0) * out.chi2 / denom;
  return out;
}

FriedmanResult friedman(const RankTable& table) {
  return friedman_from_mean_ranks(table.mean_ranks, table.n_datasets());
}

double nemenyi_cd(int k, int n, double q) {
  if (k < 2) throw Error("nemenyi_cd: k must be at least 2");
  if (n < 1) throw Error("nemenyi_cd: n must be at least 1");
  if (!(q >= 0.0)) throw Error("nemenyi_cd: q must be nonnegative");
  return q * std::sqrt(static_cast<double>(k) * (k + 1.0) / (6.0 * n));
}

std::vector<std::pair<int, int>> significant_pairs(const Eigen::VectorXd& mean_ranks, double cd) {
  std::vector<std::pair<int, int>> out;
  for (Index i = 0; i < mean_ranks.size(); ++i)
    for (Index j = i + 1; j < mean_ranks.size(); ++j)
      if (std::abs(mean_ranks(i) - mean_ranks(j)) > cd) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return out;
}

}  // namespace mkkm
