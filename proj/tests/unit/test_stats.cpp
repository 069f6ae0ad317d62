#include "mkkm/error.hpp"
#include "mkkm/stats.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace mkkm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

// Sort positions, then average the positions of each run of equal scores.
VectorXd rank_by_sort(const VectorXd& scores, bool higher_is_better) {
  const auto k = static_cast<std::size_t>(scores.size());
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return higher_is_better ? scores(a) > scores(b) : scores(a) < scores(b);
  });
  VectorXd ranks(scores.size());
  for (std::size_t i = 0; i < k;) {
    std::size_t j = i;
    while (j + 1 < k && scores(order[j + 1]) == scores(order[i])) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks(order[t]) = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

TEST(RankRow, Examples) {
  EXPECT_EQ(rank_row(vec({0.9, 0.5, 0.1}), true), vec({1, 2, 3}));
  EXPECT_EQ(rank_row(vec({0.9, 0.9, 0.1}), true), vec({1.5, 1.5, 3}));
  EXPECT_EQ(rank_row(vec({0.9, 0.5, 0.1}), false), vec({3, 2, 1}));
  EXPECT_EQ(rank_row(vec({0.3, 0.3, 0.3}), true), vec({2, 2, 2}));
}

TEST(RankRow, MatchesSortOracle) {
  std::mt19937_64 rng(80);
  for (int trial = 0; trial < 200; ++trial) {
    VectorXd s(8);
    // Coarse values so ties are common.
    for (int i = 0; i < 8; ++i) s(i) = std::round(oracle::uniform(rng, 0.0, 5.0));
    const bool hib = trial % 2 == 0;
    const VectorXd r = rank_row(s, hib);
    EXPECT_EQ(r, rank_by_sort(s, hib));
    EXPECT_NEAR(r.sum(), 36.0, 1e-12);
  }
}

TEST(RankTable, RowSumsAndMeans) {
  std::mt19937_64 rng(81);
  MatrixXd scores(10, 8);
  for (Eigen::Index i = 0; i < scores.size(); ++i) scores.data()[i] = oracle::uniform(rng);
  const RankTable t = rank_table(scores, true);
  for (Eigen::Index r = 0; r < 10; ++r) EXPECT_NEAR(t.ranks.row(r).sum(), 36.0, 1e-9);
  EXPECT_LE((t.mean_ranks - t.ranks.colwise().mean().transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(rank_table_from_ranks(MatrixXd::Ones(2, 3)), Error);
}

TEST(Friedman, IdenticalRanksGiveZero) {
  const RankTable t = rank_table(MatrixXd::Ones(5, 4), true);
  const FriedmanResult r = friedman(t);
  EXPECT_NEAR(r.chi2, 0.0, 1e-12);
  EXPECT_NEAR(r.f, 0.0, 1e-12);
}

TEST(Friedman, TwoByTwoIsDegenerate) {
  MatrixXd ranks(2, 2);
  ranks << 1, 2,
           1, 2;
  const RankTable t = rank_table_from_ranks(ranks);
  // tau_chi2 = (24/6) * ((1 + 4) - 9/2) = 2 = n(k-1).
  EXPECT_THROW_WITH(friedman(t), Error, "degenerate F statistic");
  const double chi2 = 12.0 * 2 / (2.0 * 3.0) * (1.0 + 4.0 - 2.0 * 9.0 / 4.0);
  EXPECT_DOUBLE_EQ(chi2, 2.0);
}

TEST(Friedman, PublishedMeanRanks) {
  const VectorXd r = vec({7.4, 4.4, 7.1, 5.5, 2.7, 3.7, 4.0, 1.1});
  const FriedmanResult f = friedman_from_mean_ranks(r, 10);
  const double n = 10.0, k = 8.0;
  const double chi2 = 12.0 * n / (k * (k + 1.0)) * (r.squaredNorm() - k * (k + 1.0) * (k + 1.0) / 4.0);
  EXPECT_NEAR(f.chi2, chi2, 1e-12);
  EXPECT_NEAR(f.f, (n - 1.0) * chi2 / (n * (k - 1.0) - chi2), 1e-12);
  EXPECT_NEAR(f.chi2, 51.6167, 1e-4);
  EXPECT_NEAR(f.f, 25.2702, 1e-4);
}

TEST(Friedman, InvariantUnderReordering) {
  std::mt19937_64 rng(82);
  MatrixXd scores(7, 5);
  for (Eigen::Index i = 0; i < scores.size(); ++i) scores.data()[i] = oracle::uniform(rng);
  const FriedmanResult base = friedman(rank_table(scores, true));

  std::vector<int> rows(7), cols(5);
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  std::shuffle(cols.begin(), cols.end(), rng);
  MatrixXd shuffled(7, 5);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 5; ++j) shuffled(i, j) = scores(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
  const FriedmanResult again = friedman(rank_table(shuffled, true));
  EXPECT_NEAR(again.chi2, base.chi2, 1e-12);
  EXPECT_NEAR(again.f, base.f, 1e-12);
}

TEST(Friedman, Errors) {
  EXPECT_THROW(friedman_from_mean_ranks(vec({1.0, 2.0}), 1), Error);
  EXPECT_THROW(friedman_from_mean_ranks(vec({1.0}), 5), Error);
}

TEST(Nemenyi, Examples) {
  EXPECT_NEAR(nemenyi_cd(8, 10, kQ005For8), 3.3203, 5e-5);
  EXPECT_EQ(nemenyi_cd(8, 10, 0.0), 0.0);
  EXPECT_NEAR(nemenyi_cd(2, 6, 1.0), std::sqrt(6.0 / 36.0), 1e-15);
  EXPECT_THROW(nemenyi_cd(1, 10, 3.0), Error);
  EXPECT_THROW(nemenyi_cd(8, 0, 3.0), Error);
}

TEST(Nemenyi, Monotone) {
  for (int n = 1; n < 30; ++n) EXPECT_LT(nemenyi_cd(8, n + 1, 3.0), nemenyi_cd(8, n, 3.0));
  for (int k = 2; k < 20; ++k) EXPECT_GT(nemenyi_cd(k + 1, 10, 3.0), nemenyi_cd(k, 10, 3.0));
  EXPECT_GT(nemenyi_cd(8, 10, 3.1), nemenyi_cd(8, 10, 3.0));
}

TEST(Nemenyi, SignificantPairs) {
  const VectorXd r = vec({7.4, 4.4, 7.1, 5.5, 2.7, 3.7, 4.0, 1.1});
  const auto pairs = significant_pairs(r, nemenyi_cd(8, 10, kQ005For8));
  for (const auto& [i, j] : pairs) {
    EXPECT_LT(i, j);
    EXPECT_GT(std::abs(r(i) - r(j)), 3.3203);
  }
  // 7.4 vs 1.1 is the widest gap; 5.5 vs 4.0 is well inside the CD.
  EXPECT_NE(std::find(pairs.begin(), pairs.end(), std::make_pair(0, 7)), pairs.end());
  EXPECT_EQ(std::find(pairs.begin(), pairs.end(), std::make_pair(3, 6)), pairs.end());
  int expected = 0;
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) expected += std::abs(r(i) - r(j)) > nemenyi_cd(8, 10, kQ005For8);
  EXPECT_EQ(static_cast<int>(pairs.size()), expected);
}
