#include "cli.hpp"

#include "mkkm/bench.hpp"
#include "mkkm/error.hpp"
#include "mkkm/io.hpp"
#include "mkkm/kernels.hpp"
#include "mkkm/random.hpp"
#include "mkkm/stats.hpp"
#include "mkkm/synthetic.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace mkkm::cli {

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

int cmd_kernels(const fs::path& features, const fs::path& out_dir, bool normalize, bool scale, bool header,
                std::ostream& out, std::ostream& err) {
  const FeatureMatrix X = load_features(features, header);
  const KernelBank bank = standard_bank(X, normalize, scale);
  const fs::path manifest = write_bank(bank, out_dir);
  err << "built " << bank.size() << " kernels on n=" << bank.n() << " samples\n";
  out << manifest.string() << '\n';
  return kOk;
}

int cmd_run(const fs::path& config_path, const std::string& out_override, std::ostream& out, std::ostream& err) {
  RunConfig config = load_run_config(config_path);
  if (!out_override.empty()) config.output_dir = out_override;
  const auto cells = expand_cells(config);
  if (cells.size() != 1)
    throw ConfigError("config.algorithms: run expects one algorithm at one parameter point, got " +
                      std::to_string(cells.size()) + " cells (use bench for sweeps)");
  if (config.metrics && !config.labels)
    throw ConfigError("config.labels: metrics requested but no labels file given (set \"metrics\": false to run without)");

  const Dataset data = load_dataset(config);
  const auto seeds = expand_seeds(config.seed, static_cast<std::size_t>(config.repetitions));
  const ResultRecord record = run_cell(data, cells.front(), config, seeds);

  out << "algorithm " << record.algorithm << " " << record.params_label() << '\n';
  if (!record.objective_trace.empty()) {
    out << "objective";
    for (double f : record.objective_trace) out << ' ' << fmt("%.17g", f);
    out << '\n';
    out << "iterations " << record.iterations << (record.converged ? " converged" : " not-converged") << '\n';
  }
  if (!record.weights.empty()) {
    out << "weights";
    for (double w : record.weights) out << ' ' << fmt("%.6g", w);
    out << '\n';
  }
  if (record.best_kernel) out << "best_kernel " << *record.best_kernel << '\n';
  if (!record.repetitions.empty()) {
    for (const char* metric : kMetricNames)
      out << metric << ' ' << fmt("%.4f", metric_by_name(record.summary.mean, metric)) << "\xC2\xB1"
          << fmt("%.4f", metric_by_name(record.summary.std, metric)) << '\n';
  }
  for (const auto& w : record.warnings) err << "warning: " << w << '\n';

  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw Error("cannot create output directory '" + config.output_dir.string() + "': " + ec.message());
  const std::string stem = config.dataset + "_" + record.algorithm;
  const fs::path record_path = config.output_dir / (stem + "_record.json");
  std::ofstream rec(record_path, std::ios::trunc);
  if (!rec) throw Error("cannot open '" + record_path.string() + "' for writing");
  rec << to_json(record).dump(2) << '\n';
  if (!rec) throw Error("write to '" + record_path.string() + "' failed");
  save_labels(record.labels, config.output_dir / (stem + "_labels.csv"));
  err << "wrote " << record_path.string() << '\n';
  return kOk;
}

int cmd_bench(const std::string& config_path, const std::string& manifest_path, const std::string& out_override,
              int jobs, std::ostream& out, std::ostream& err) {
  if (config_path.empty() == manifest_path.empty()) throw ConfigError("bench: give exactly one of --config or --manifest");
  RunConfig config = manifest_path.empty() ? load_run_config(config_path) : config_from_manifest(manifest_path);
  if (!out_override.empty()) config.output_dir = out_override;
  const BenchOutcome outcome = run_bench(config, jobs, config.output_dir, &err);
  out << outcome.manifest.string() << '\n';
  err << outcome.records.size() << " cells, " << outcome.failures << " failed\n";
  return outcome.failures == 0 ? kOk : kFailure;
}

struct ScoreTable {
  std::vector<std::string> algorithms;
  std::vector<std::string> datasets;
  Eigen::MatrixXd values;
};

ScoreTable read_score_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open score table '" + path.string() + "'");
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto a = cell.find_first_not_of(" \t\r");
      const auto b = cell.find_last_not_of(" \t\r");
      cells.push_back(a == std::string::npos ? std::string() : cell.substr(a, b - a + 1));
    }
    return cells;
  };
  ScoreTable t;
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line);
    if (t.algorithms.empty()) {
      if (cells.size() < 3) throw ConfigError(path.string() + ": header needs a dataset column and at least 2 algorithms");
      t.algorithms.assign(cells.begin() + 1, cells.end());
      continue;
    }
    if (cells.size() != t.algorithms.size() + 1)
      throw ConfigError(path.string() + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " fields, expected " + std::to_string(t.algorithms.size() + 1));
    t.datasets.push_back(cells[0]);
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cells[c].size() || cells[c].empty() || !std::isfinite(v))
        throw ConfigError(path.string() + ": line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                          ": '" + cells[c] + "' is not a finite number");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw ConfigError(path.string() + ": need at least 2 dataset rows");
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.algorithms.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return t;
}

int cmd_stats(const fs::path& scores, bool higher_better, bool are_ranks, double q, std::ostream& out) {
  const ScoreTable t = read_score_table(scores);
  RankTable ranks;
  try {
    ranks = are_ranks ? rank_table_from_ranks(t.values) : rank_table(t.values, higher_better);
  } catch (const Error& e) {
    throw ConfigError(scores.string() + ": " + e.what());
  }
  const int k = static_cast<int>(ranks.k_algorithms());
  const int n = static_cast<int>(ranks.n_datasets());
  out << "datasets " << n << '\n' << "algorithms " << k << '\n';
  out << "mean_ranks";
  for (int i = 0; i < k; ++i) out << ' ' << t.algorithms[static_cast<std::size_t>(i)] << '=' << fmt("%.4f", ranks.mean_ranks(i));
  out << '\n';
  try {
    const FriedmanResult f = friedman(ranks);
    out << "tau_chi2 " << fmt("%.4f", f.chi2) << '\n' << "tau_F " << fmt("%.4f", f.f) << '\n';
  } catch (const Error& e) {
    out << "tau_F undefined (" << e.what() << ")\n";
  }
  const double cd = nemenyi_cd(k, n, q);
  out << "CD " << fmt("%.4f", cd) << " (q=" << fmt("%g", q) << ")\n";
  for (const auto& [i, j] : significant_pairs(ranks.mean_ranks, cd))
    out << "significant " << t.algorithms[static_cast<std::size_t>(i)] << ' ' << t.algorithms[static_cast<std::size_t>(j)]
        << " gap=" << fmt("%.4f", std::abs(ranks.mean_ranks(i) - ranks.mean_ranks(j))) << '\n';
  return kOk;
}

int cmd_synth(const fs::path& out_dir, std::uint64_t seed, std::ostream& out) {
  const LabeledData data = three_blob_fixture(seed);
  save_features(data.X, out_dir / "features.csv");
  save_labels(data.labels, out_dir / "labels.csv");
  out << (out_dir / "features.csv").string() << '\n' << (out_dir / "labels.csv").string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple kernel k-means with kernel correlation and dissimilarity", "kcdmkkm"};
  app.require_subcommand(1);

  auto* kernels = app.add_subcommand("kernels", "Kernel bank construction");
  auto* build = kernels->add_subcommand("build", "Build the standard 12-kernel bank from a features CSV");
  kernels->require_subcommand(1);
  std::string features, kernels_out;
  bool normalize = false, scale = false, header = false;
  build->add_option("--features", features, "Features CSV, one sample per row")->required()->check(CLI::ExistingFile);
  build->add_option("--out", kernels_out, "Output directory")->required();
  build->add_flag("--normalize", normalize, "Normalize every kernel to unit diagonal");
  build->add_flag("--scale", scale, "Min-max scale every kernel to [0,1]");
  build->add_flag("--header", header, "Features CSV has a header row");

  auto* run_cmd = app.add_subcommand("run", "Run one algorithm at one parameter point");
  std::string run_config, run_out;
  run_cmd->add_option("--config", run_config, "Run config JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run_out, "Output directory (overrides output_dir)");

  auto* bench = app.add_subcommand("bench", "Sweep algorithms and parameter grids");
  std::string bench_config, bench_manifest, bench_out;
  int jobs = 1;
  bench->add_option("--config", bench_config, "Run config JSON")->check(CLI::ExistingFile);
  bench->add_option("--manifest", bench_manifest, "Replay the config stored in a bench manifest")->check(CLI::ExistingFile);
  bench->add_option("--out", bench_out, "Output directory (overrides output_dir)");
  bench->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* stats = app.add_subcommand("stats", "Rank statistics over a score table");
  auto* friedman_cmd = stats->add_subcommand("friedman", "Friedman test and Nemenyi critical difference");
  stats->require_subcommand(1);
  std::string scores;
  bool higher_better = false, are_ranks = false;
  double q = kQ005For8;
  friedman_cmd->add_option("--scores", scores, "CSV: header 'dataset,<alg>...', one row per dataset")
      ->required()
      ->check(CLI::ExistingFile);
  friedman_cmd->add_flag("--higher-better", higher_better, "Higher scores rank first");
  friedman_cmd->add_flag("--ranks", are_ranks, "Table already holds ranks");
  friedman_cmd->add_option("--q", q, "Studentized range critical value")->check(CLI::NonNegativeNumber);

  auto* synth = app.add_subcommand("synth", "Synthetic data");
  auto* blobs = synth->add_subcommand("blobs", "Write the three-blob fixture (features.csv, labels.csv)");
  synth->require_subcommand(1);
  std::string synth_out;
  std::uint64_t synth_seed = 7;
  blobs->add_option("--out", synth_out, "Output directory")->required();
  blobs->add_option("--seed", synth_seed, "Generator seed");

  std::vector<const char*> argv{"kcdmkkm"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (build->parsed()) return cmd_kernels(features, kernels_out, normalize, scale, header, out, err);
    if (run_cmd->parsed()) return cmd_run(run_config, run_out, out, err);
    if (bench->parsed()) return cmd_bench(bench_config, bench_manifest, bench_out, jobs, out, err);
    if (friedman_cmd->parsed()) return cmd_stats(scores, higher_better, are_ranks, q, out);
    if (blobs->parsed()) return cmd_synth(synth_out, synth_seed, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  err << app.help();
  return kUsage;
}

}  // namespace mkkm::cli
