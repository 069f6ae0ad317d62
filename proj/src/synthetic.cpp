#include "mkkm/synthetic.hpp"

#include "mkkm/error.hpp"
#include "mkkm/random.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace mkkm {

LabeledData make_blobs(const Eigen::MatrixXd& centers, int per_blob, double spread, std::uint64_t seed) {
  if (centers.size() == 0) throw Error("make_blobs: no centers");
  if (per_blob < 1) throw Error("make_blobs: per_blob must be positive");
  if (!(spread >= 0.0)) throw Error("make_blobs: spread must be nonnegative");

  const Eigen::Index d = centers.rows();
  const Eigen::Index blobs = centers.cols();
  std::mt19937_64 rng(seed);
  // Box-Muller on the portable uniform generator.
  auto normal = [&]() {
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };

  LabeledData out;
  out.X.resize(d, blobs * per_blob);
  out.labels.reserve(static_cast<std::size_t>(blobs * per_blob));
  Eigen::Index col = 0;
  for (Eigen::Index b = 0; b < blobs; ++b)
    for (int i = 0; i < per_blob; ++i, ++col) {
      for (Eigen::Index r = 0; r < d; ++r) out.X(r, col) = centers(r, b) + spread * normal();
      out.labels.push_back(static_cast<int>(b));
    }
  return out;
}

LabeledData three_blob_fixture(std::uint64_t seed) {
  Eigen::MatrixXd centers(2, 3);
  centers << 5.0, 15.0, 10.0,
             5.0, 5.0, 5.0 + 10.0 * std::sqrt(3.0) / 2.0;
  return make_blobs(centers, 50, 0.5, seed);
}

}  // namespace mkkm
