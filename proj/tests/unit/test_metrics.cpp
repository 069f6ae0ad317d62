#include "mkkm/error.hpp"
#include "mkkm/metrics.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace mkkm;

namespace {

std::vector<int> relabel(const std::vector<int>& labels, const std::vector<int>& map) {
  std::vector<int> out;
  for (int l : labels) out.push_back(map[static_cast<std::size_t>(l)]);
  return out;
}

}  // namespace

TEST(Accuracy, Examples) {
  const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
  EXPECT_EQ(accuracy(truth, truth), 1.0);
  EXPECT_EQ(accuracy({2, 2, 0, 0, 1, 1}, truth), 1.0);
  // Best map 1->0, 0->1, 2->2 matches 2 + 1 + 2 points.
  EXPECT_DOUBLE_EQ(oracle::accuracy_permutations({1, 1, 0, 2, 2, 2}, truth), 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(accuracy({1, 1, 0, 2, 2, 2}, truth), 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(accuracy({0, 1, 0, 1, 2, 2}, truth), 4.0 / 6.0);
}

TEST(Accuracy, UnequalClusterCounts) {
  EXPECT_DOUBLE_EQ(accuracy({0, 0, 0, 0}, {0, 0, 1, 1}), 0.5);
  EXPECT_DOUBLE_EQ(accuracy({0, 1, 2, 3}, {0, 0, 1, 1}), 0.5);
  EXPECT_DOUBLE_EQ(accuracy({5, 5, 9, 9}, {0, 0, 1, 1}), 1.0);
}

TEST(Nmi, Examples) {
  const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
  EXPECT_NEAR(nmi(truth, truth), 1.0, 1e-15);
  // Exact quarter counts: pred independent of truth.
  EXPECT_EQ(nmi({0, 1, 0, 1, 0, 1, 0, 1}, {0, 0, 1, 1, 0, 0, 1, 1}), 0.0);
  const double direct = [] {
    // truth = [0,0,1,1], pred = [0,1,1,1]: cells (0,0)=1, (0,1)=1, (1,1)=2.
    const double mi = 0.25 * std::log(0.25 / (0.5 * 0.25)) + 0.25 * std::log(0.25 / (0.5 * 0.75)) +
                      0.5 * std::log(0.5 / (0.5 * 0.75));
    const double ht = std::log(2.0);
    const double hp = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
    return mi / std::sqrt(ht * hp);
  }();
  EXPECT_NEAR(nmi({0, 1, 1, 1}, {0, 0, 1, 1}), direct, 1e-15);
  EXPECT_NEAR(nmi({0, 1, 1, 1}, {0, 0, 1, 1}), 0.3455920299442113, 1e-14);
  EXPECT_EQ(nmi({0, 0, 0, 0}, {0, 0, 1, 1}), 0.0);
  EXPECT_EQ(nmi({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
}

TEST(Purity, Examples) {
  const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
  EXPECT_EQ(purity(truth, truth), 1.0);
  EXPECT_EQ(purity({0, 0, 0, 0}, {0, 0, 1, 1}), 0.5);
  EXPECT_DOUBLE_EQ(purity({0, 0, 0, 1, 1, 1}, truth), 4.0 / 6.0);
}

TEST(Ari, Examples) {
  const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
  EXPECT_NEAR(ari(truth, truth), 1.0, 1e-15);
  EXPECT_NEAR(ari({0, 1, 0, 1}, {0, 0, 1, 1}), -0.5, 1e-15);
  EXPECT_NEAR(oracle::ari_pairs({0, 1, 0, 1}, {0, 0, 1, 1}), -0.5, 1e-15);
}

TEST(Ari, RandomPairsMatchPairCounting) {
  std::mt19937_64 rng(70);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> a(8), b(8);
    for (int i = 0; i < 8; ++i) {
      a[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 3);
      b[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 4);
    }
    EXPECT_NEAR(ari(a, b), oracle::ari_pairs(a, b), 1e-12);
    EXPECT_EQ(ari(a, b), ari(b, a));
  }
}

TEST(Metrics, ExhaustiveOracleEquivalence) {
  for (int n = 2; n <= 8; ++n) {
    const auto parts = oracle::set_partitions(n, 3);
    for (const auto& truth : parts)
      for (const auto& pred : parts) {
        ASSERT_NEAR(accuracy(pred, truth), oracle::accuracy_permutations(pred, truth), 1e-12);
        ASSERT_NEAR(nmi(pred, truth), oracle::nmi_log2(pred, truth), 1e-12);
        ASSERT_NEAR(purity(pred, truth), oracle::purity_loops(pred, truth), 1e-12);
        ASSERT_NEAR(ari(pred, truth), oracle::ari_pairs(pred, truth), 1e-12);
        ASSERT_EQ(ari(pred, truth), ari(truth, pred));
      }
  }
}

TEST(Metrics, RangesAndRelabelingInvariance) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 40);
    std::vector<int> pred(static_cast<std::size_t>(n)), truth(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      pred[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 5);
      truth[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 4);
    }
    const MetricValues v = evaluate(pred, truth);
    for (double x : {v.acc, v.nmi, v.pur}) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0 + 1e-12);
    }
    EXPECT_GE(v.ari, -1.0);
    EXPECT_LE(v.ari, 1.0);

    std::vector<int> mp(5), mt(4);
    std::iota(mp.begin(), mp.end(), 10);
    std::iota(mt.begin(), mt.end(), 0);
    std::shuffle(mp.begin(), mp.end(), rng);
    std::shuffle(mt.begin(), mt.end(), rng);
    const MetricValues w = evaluate(relabel(pred, mp), relabel(truth, mt));
    EXPECT_NEAR(w.acc, v.acc, 1e-12);
    EXPECT_NEAR(w.nmi, v.nmi, 1e-12);
    EXPECT_NEAR(w.pur, v.pur, 1e-12);
    EXPECT_NEAR(w.ari, v.ari, 1e-12);
  }
}

TEST(Contingency, SumsConsistent) {
  const ContingencyTable t = contingency({0, 1, 1, 2, 2, 2}, {1, 1, 0, 0, 3, 3});
  EXPECT_EQ(t.k_true(), 3);
  EXPECT_EQ(t.k_pred(), 3);
  EXPECT_EQ(t.counts.sum(), 6.0);
  EXPECT_EQ(t.counts.rowwise().sum(), t.true_sizes);
  EXPECT_EQ(t.counts.colwise().sum().transpose(), t.pred_sizes);
  EXPECT_EQ(t.n, 6.0);
}

TEST(Hungarian, MatchesBruteForce) {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 6;
    Eigen::MatrixXd W(n, n);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = oracle::uniform(rng, 0.0, 10.0);
    const std::vector<int> assign = hungarian_max(W);
    double got = 0.0;
    for (int r = 0; r < n; ++r) got += W(r, assign[static_cast<std::size_t>(r)]);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1.0;
    do {
      double s = 0.0;
      for (int r = 0; r < n; ++r) s += W(r, perm[static_cast<std::size_t>(r)]);
      best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(got, best, 1e-9);
  }
}

TEST(Aggregate, Examples) {
  MetricValues one{0.7, 0.6, 0.8, 0.5};
  const MetricsReport single = aggregate({one});
  EXPECT_EQ(single.mean.acc, 0.7);
  EXPECT_EQ(single.std.acc, 0.0);
  EXPECT_EQ(single.repetitions, 1);

  const auto [mean, sd] = mean_std({0.4, 0.6});
  EXPECT_NEAR(mean, 0.5, 1e-15);
  EXPECT_NEAR(sd, std::sqrt(0.02), 1e-15);

  const MetricsReport same = aggregate(std::vector<MetricValues>(50, one));
  EXPECT_EQ(same.std.acc, 0.0);
  EXPECT_EQ(same.std.ari, 0.0);
  EXPECT_NEAR(same.mean.nmi, 0.6, 1e-15);
  EXPECT_EQ(same.repetitions, 50);
  EXPECT_STREQ(MetricsReport::kStdDivisor, "n-1");
}

TEST(Metrics, Errors) {
  EXPECT_THROW(accuracy({0, 1}, {0, 1, 1}), Error);
  EXPECT_THROW(nmi({0, 1}, {0}), Error);
  EXPECT_THROW(purity({}, {}), Error);
  EXPECT_THROW_WITH(ari({0}, {0}), Error, "at least two");
  EXPECT_THROW(aggregate({}), Error);
  EXPECT_THROW(metric_by_name(MetricValues{}, "f1"), Error);
  EXPECT_EQ(metric_by_name(MetricValues{0.1, 0.2, 0.3, 0.4}, "pur"), 0.3);
}
