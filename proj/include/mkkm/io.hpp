#pragma once

#include "mkkm/kernels.hpp"
#include "mkkm/metrics.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mkkm {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Matrices and labels

/// Reads a CSV with one sample per row into a d x n feature matrix. Rejects
/// ragged rows, non-numeric cells (the message names row and column) and
/// NaN/Inf.
FeatureMatrix load_features(const fs::path& path, bool has_header = false);
void save_features(const FeatureMatrix& X, const fs::path& path);

/// Reads a numeric CSV as a dense matrix (rows as in the file).
Eigen::MatrixXd read_csv_matrix(const fs::path& path, bool has_header = false);
/// Writes with 17 significant digits so values round-trip exactly.
void write_csv_matrix(const Eigen::MatrixXd& A, const fs::path& path,
                      const std::vector<std::string>& header = {});

/// One integer label per line; a non-numeric first line is treated as a header.
std::vector<int> load_labels(const fs::path& path);
void save_labels(const std::vector<int>& labels, const fs::path& path);

/// Binary kernel layout: magic "MKK1", uint32 n (little-endian), then n*n
/// little-endian float64 values in row-major order.
inline constexpr char kKernelMagic[4] = {'M', 'K', 'K', '1'};

void save_kernel_binary(const Eigen::MatrixXd& K, const fs::path& path);
/// Loads either format: files starting with "MKK1" are binary, anything
/// else is parsed as an n x n CSV. The result is tagged "precomputed" and
/// must be symmetric within 1e-8.
GramMatrix load_kernel(const fs::path& path);

// ---------------------------------------------------------------------------
// Run configuration

inline constexpr const char* kAlgorithmNames[] = {"kkm", "a_mkkm", "sb_kkm", "mkkm", "mkkm_mr", "kcd"};
bool is_known_algorithm(const std::string& name);

struct RunConfig {
  std::string dataset = "dataset";
  /// Exactly one data source: features CSV, precomputed kernel files, or a
  /// bank manifest written by `kernels build`.
  std::optional<fs::path> features;
  bool features_header = false;
  std::vector<fs::path> kernels;
  std::optional<fs::path> bank;
  std::optional<fs::path> labels;

  int k = 0;
  std::vector<std::string> algorithms;
  std::vector<double> alpha{0.5};
  std::vector<double> beta{1.0 / 256.0};
  std::vector<double> lambda{1.0};
  std::size_t kernel_index = 0;  // kkm only

  int repetitions = 50;
  std::uint64_t seed = 0;
  std::optional<double> epsilon;
  int max_outer_iters = 50;

  /// Unset means: on for kernels built from features, off for precomputed.
  std::optional<bool> normalize;
  std::optional<bool> scale;
  bool row_normalize = false;
  bool metrics = true;
  bool export_relations = false;
  fs::path output_dir = "results";
};

/// Parses and validates a JSON config. Relative paths resolve against
/// `base_dir`. Errors are ConfigError with a field path, e.g.
/// "config.alpha[2]: expected a number".
RunConfig parse_run_config(const nlohmann::json& j, const fs::path& base_dir = {});
RunConfig load_run_config(const fs::path& path);
nlohmann::json to_json(const RunConfig& config);

/// Full tuning grids (config value "full"): alpha in {0.1..0.9}, beta in {2^-14..2^-5},
/// lambda in {2^-15..2^10}.
std::vector<double> default_alpha_grid();
std::vector<double> default_beta_grid();
std::vector<double> default_lambda_grid();

// ---------------------------------------------------------------------------
// Results

struct ResultRecord {
  std::string dataset;
  std::string algorithm;
  std::map<std::string, double> params;
  std::vector<MetricValues> repetitions;
  MetricsReport summary;
  double seconds = 0.0;
  int iterations = 0;
  bool converged = true;
  std::vector<double> objective_trace;
  std::vector<double> weights;
  std::optional<std::size_t> best_kernel;
  std::vector<std::string> warnings;
  /// Partition of the first repetition; not part of the JSON record.
  std::vector<int> labels;
  /// Non-empty when the cell failed; such cells are excluded from tables.
  std::string error;

  bool ok() const { return error.empty(); }
  /// "alpha=0.5;beta=0.00390625" style, keys sorted.
  std::string params_label() const;
};

nlohmann::json to_json(const ResultRecord& record, bool include_timing = true);

/// 64-bit FNV-1a over a string.
std::uint64_t fnv1a64(const std::string& text);

/// Writes, for every (dataset, metric), `<dataset>_<metric>.csv` with one
/// row per algorithm at its best cell for that metric, plus
/// `<dataset>_cells.csv` (every cell), `<dataset>_weights.csv` (learned
/// weights at the best-ACC cell), `manifest.json` (config, hash, seeds,
/// table list) and `timings.json`. Everything except timings.json is a
/// deterministic function of the records. Returns the manifest path.
fs::path persist_results(const std::vector<ResultRecord>& records, const fs::path& dir,
                         const nlohmann::json& config, const std::vector<std::uint64_t>& seeds);

}  // namespace mkkm
