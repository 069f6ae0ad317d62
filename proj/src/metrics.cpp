#include "mkkm/metrics.hpp"

#include "mkkm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace mkkm {

using Eigen::Index;

namespace {

std::map<int, Index> compact(const std::vector<int>& labels) {
  std::map<int, Index> ids;
  for (int l : labels) ids.emplace(l, 0);
  Index next = 0;
  for (auto& [label, id] : ids) id = next++;
  return ids;
}

void check_lengths(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    throw Error("metrics: prediction has " + std::to_string(pred.size()) + " labels, truth has " +
                std::to_string(truth.size()));
  if (pred.empty()) throw Error("metrics: empty partitions");
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

ContingencyTable contingency(const std::vector<int>& pred, const std::vector<int>& truth) {
  check_lengths(pred, truth);
  const auto true_ids = compact(truth);
  const auto pred_ids = compact(pred);
  ContingencyTable t;
  t.counts = Eigen::MatrixXd::Zero(static_cast<Index>(true_ids.size()), static_cast<Index>(pred_ids.size()));
  for (std::size_t i = 0; i < pred.size(); ++i) t.counts(true_ids.at(truth[i]), pred_ids.at(pred[i])) += 1.0;
  t.true_sizes = t.counts.rowwise().sum();
  t.pred_sizes = t.counts.colwise().sum().transpose();
  t.n = static_cast<double>(pred.size());
  return t;
}

std::vector<int> hungarian_max(const Eigen::MatrixXd& weights) {
  const Index n = weights.rows();
  if (weights.cols() != n) throw Error("hungarian_max: matrix must be square");
  if (n == 0) return {};
  const double top = weights.maxCoeff();
  // Minimize (top - w) with the potentials formulation; 1-based arrays.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> match(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  auto cost = [&](Index i, Index j) { return top - weights(i - 1, j - 1); };

  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0, j) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (Index j = 1; j <= n; ++j) row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = static_cast<int>(j - 1);
  return row_to_col;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  const ContingencyTable t = contingency(pred, truth);
  const Index size = std::max(t.k_true(), t.k_pred());
  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(size, size);
  // Rows are predicted clusters, columns true classes.
  padded.topLeftCorner(t.k_pred(), t.k_true()) = t.counts.transpose();
  const std::vector<int> assignment = hungarian_max(padded);
  double matched = 0.0;
  for (Index r = 0; r < size; ++r) matched += padded(r, assignment[static_cast<std::size_t>(r)]);
  return matched / t.n;
}

double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  const ContingencyTable t = contingency(pred, truth);
  const double n = t.n;
  double mi = 0.0;
  for (Index p = 0; p < t.k_true(); ++p)
    for (Index q = 0; q < t.k_pred(); ++q) {
      const double npq = t.counts(p, q);
      if (npq > 0.0) mi += (npq / n) * std::log((n * npq) / (t.true_sizes(p) * t.pred_sizes(q)));
    }
  auto entropy = [n](const Eigen::VectorXd& sizes) {
    double h = 0.0;
    for (Index i = 0; i < sizes.size(); ++i)
      if (sizes(i) > 0.0) h += (sizes(i) / n) * std::log(n / sizes(i));
    return h;
  };
  const double h_true = entropy(t.true_sizes);
  const double h_pred = entropy(t.pred_sizes);
  mi = std::max(mi, 0.0);
  if (mi == 0.0) return 0.0;
  const double denom = std::sqrt(h_true * h_pred);
  if (!(denom > 0.0)) throw Error("undefined NMI: zero entropy with positive mutual information");
  return std::clamp(mi / denom, 0.0, 1.0);
}

double purity(const std::vector<int>& pred, const std::vector<int>& truth) {
  const ContingencyTable t = contingency(pred, truth);
  double claimed = 0.0;
  for (Index q = 0; q < t.k_pred(); ++q) claimed += t.counts.col(q).maxCoeff();
  return claimed / t.n;
}

double ari(const std::vector<int>& pred, const std::vector<int>& truth) {
  check_lengths(pred, truth);
  if (pred.size() < 2) throw Error("ARI needs at least two points");
  const ContingencyTable t = contingency(pred, truth);
  double index = 0.0;
  for (Index i = 0; i < t.counts.size(); ++i) index += choose2(t.counts.data()[i]);
  double rows = 0.0, cols = 0.0;
  for (Index p = 0; p < t.k_true(); ++p) rows += choose2(t.true_sizes(p));
  for (Index q = 0; q < t.k_pred(); ++q) cols += choose2(t.pred_sizes(q));
  const double expected = rows * cols / choose2(t.n);
  const double max_index = 0.5 * (rows + cols);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

MetricValues evaluate(const std::vector<int>& pred, const std::vector<int>& truth) {
  return {accuracy(pred, truth), nmi(pred, truth), purity(pred, truth), ari(pred, truth)};
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) throw Error("aggregate: no values");
  const double count = static_cast<double>(values.size());
  // Shifted by the first value so that identical repetitions give exactly
  // that value and a zero deviation.
  const double origin = values.front();
  double shift = 0.0;
  for (double v : values) shift += v - origin;
  shift /= count;
  const double mean = origin + shift;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - origin - shift) * (v - origin - shift);
  return {mean, std::sqrt(ss / (count - 1.0))};
}

MetricsReport aggregate(const std::vector<MetricValues>& values) {
  if (values.empty()) throw Error("aggregate: empty report list");
  MetricsReport r;
  r.repetitions = static_cast<int>(values.size());
  auto column = [&](double MetricValues::*field) {
    std::vector<double> xs;
    xs.reserve(values.size());
    for (const auto& v : values) xs.push_back(v.*field);
    return mean_std(xs);
  };
  for (auto field : {&MetricValues::acc, &MetricValues::nmi, &MetricValues::pur, &MetricValues::ari}) {
    const auto [m, s] = column(field);
    r.mean.*field = m;
    r.std.*field = s;
  }
  return r;
}

double metric_by_name(const MetricValues& v, const std::string& name) {
  if (name == "acc") return v.acc;
  if (name == "nmi") return v.nmi;
  if (name == "pur") return v.pur;
  if (name == "ari") return v.ari;
  throw Error("unknown metric '" + name + "'");
}

}  // namespace mkkm
