#pragma once

#include "mkkm/io.hpp"
#include "mkkm/kernels.hpp"
#include "mkkm/relations.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mkkm {

struct Dataset {
  std::string name;
  KernelBank bank;
  std::optional<std::vector<int>> labels;
  RelationMatrices relations;
};

/// Writes one MKK1 file per kernel plus `bank.json` listing them in order.
fs::path write_bank(const KernelBank& bank, const fs::path& dir);
KernelBank load_bank(const fs::path& manifest);

/// Loads the configured data source and computes M and D once.
Dataset load_dataset(const RunConfig& config);

/// One point of the sweep.
struct Cell {
  std::string algorithm;
  std::map<std::string, double> params;
};

/// Cells in a fixed order: algorithms as listed; kcd over alpha x beta,
/// mkkm_mr over lambda, kkm at kernel_index, the rest once.
std::vector<Cell> expand_cells(const RunConfig& config);

/// Runs the algorithm once (with seeds[0]) and re-discretizes the final
/// embedding for every repetition seed. Errors propagate.
ResultRecord run_cell(const Dataset& data, const Cell& cell, const RunConfig& config,
                      const std::vector<std::uint64_t>& seeds);

struct BenchOutcome {
  std::vector<ResultRecord> records;
  std::vector<std::uint64_t> seeds;
  fs::path manifest;
  int failures = 0;
};

/// Full sweep on up to `jobs` threads. Failing cells are recorded with
/// their error and skipped; records are ordered by cell index.
BenchOutcome run_bench(const RunConfig& config, int jobs, const fs::path& out_dir, std::ostream* progress = nullptr);

/// Parses the config stored in a bench manifest and checks its hash.
RunConfig config_from_manifest(const fs::path& manifest);

}  // namespace mkkm
