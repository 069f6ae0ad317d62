#include "mkkm/relations.hpp"

#include "mkkm/error.hpp"

#include <cmath>

namespace mkkm {

namespace {

using Eigen::Index;

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_shapes(const KernelBank& bank) {
  if (bank.empty()) throw Error("relations: empty kernel bank");
  const Index n = bank.n();
  for (std::size_t p = 0; p < bank.size(); ++p)
    if (bank[p].values.rows() != n || bank[p].values.cols() != n)
      throw Error("relations: kernel " + std::to_string(p) + " does not match sample count " + std::to_string(n));
}

template <typename Fn>
Eigen::MatrixXd pairwise(const KernelBank& bank, bool zero_diagonal, Fn&& term) {
  check_shapes(bank);
  const Index m = static_cast<Index>(bank.size());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(m, m);
  for (Index q = 0; q < m; ++q) {
    for (Index p = 0; p <= q; ++p) {
      if (zero_diagonal && p == q) continue;
      const auto& A = bank[static_cast<std::size_t>(p)].values;
      const auto& B = bank[static_cast<std::size_t>(q)].values;
      CompensatedSum acc;
      const double* a = A.data();
      const double* b = B.data();
      for (Index i = 0; i < A.size(); ++i) acc.add(term(a[i], b[i]));
      R(p, q) = acc.value();
      R(q, p) = R(p, q);
    }
  }
  return R;
}

}  // namespace

Eigen::MatrixXd correlation_matrix(const KernelBank& bank) {
  return pairwise(bank, false, [](double x, double y) { return x * y; });
}

Eigen::MatrixXd dissimilarity_matrix(const KernelBank& bank) {
  return pairwise(bank, true, [](double x, double y) { return std::abs(x - y); });
}

RelationMatrices compute_relations(const KernelBank& bank) {
  return {correlation_matrix(bank), dissimilarity_matrix(bank)};
}

}  // namespace mkkm
