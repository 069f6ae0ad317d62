#pragma once

#include "mkkm/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace mkkm {

struct LabeledData {
  FeatureMatrix X;  // d x n
  std::vector<int> labels;
};

/// Isotropic Gaussian blobs, `per_blob` points around each column of
/// `centers`, samples ordered blob by blob. Deterministic in `seed`.
LabeledData make_blobs(const Eigen::MatrixXd& centers, int per_blob, double spread, std::uint64_t seed);

/// Three well separated blobs in the plane, 50 points each, spread 0.5 and
/// centers 10 apart.
LabeledData three_blob_fixture(std::uint64_t seed = 7);

}  // namespace mkkm
