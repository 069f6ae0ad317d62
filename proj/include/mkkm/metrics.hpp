#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mkkm {

/// counts(p, q) = number of points with true class p and predicted cluster q.
/// Distinct label values are mapped to 0..k-1 in ascending order, so labels
/// need not be contiguous.
struct ContingencyTable {
  Eigen::MatrixXd counts;
  Eigen::VectorXd true_sizes;
  Eigen::VectorXd pred_sizes;
  double n = 0.0;

  Eigen::Index k_true() const { return counts.rows(); }
  Eigen::Index k_pred() const { return counts.cols(); }
};

ContingencyTable contingency(const std::vector<int>& pred, const std::vector<int>& truth);

/// Fraction of points matched under the best one-to-one map from predicted
/// clusters to true classes (Hungarian assignment).
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// MI / sqrt(H(truth) H(pred)) with natural logs. Returns 0 when MI is 0,
/// including the single-cluster case.
double nmi(const std::vector<int>& pred, const std::vector<int>& truth);

/// Each predicted cluster claims its majority true class.
double purity(const std::vector<int>& pred, const std::vector<int>& truth);

/// Adjusted Rand index from binomial pair counts. When the denominator
/// vanishes (both partitions are all-singletons or both a single cluster)
/// the partitions are identical and 1 is returned.
double ari(const std::vector<int>& pred, const std::vector<int>& truth);

/// Maximum-weight perfect matching on a square matrix. Returns, for each
/// row, its assigned column.
std::vector<int> hungarian_max(const Eigen::MatrixXd& weights);

struct MetricValues {
  double acc = 0.0;
  double nmi = 0.0;
  double pur = 0.0;
  double ari = 0.0;
};

MetricValues evaluate(const std::vector<int>& pred, const std::vector<int>& truth);

/// Per-metric mean and sample standard deviation over repetitions.
struct MetricsReport {
  MetricValues mean;
  MetricValues std;
  int repetitions = 0;
  /// Divisor used for the standard deviation.
  static constexpr const char* kStdDivisor = "n-1";
};

/// Mean and (n-1)-divisor standard deviation; std is 0 for a single value.
MetricsReport aggregate(const std::vector<MetricValues>& values);

/// Mean and sample std of one series.
std::pair<double, double> mean_std(const std::vector<double>& values);

inline constexpr const char* kMetricNames[] = {"acc", "nmi", "pur", "ari"};
double metric_by_name(const MetricValues& v, const std::string& name);

}  // namespace mkkm
