#include "mkkm/bench.hpp"

#include "mkkm/cluster.hpp"
#include "mkkm/error.hpp"
#include "mkkm/metrics.hpp"
#include "mkkm/random.hpp"
#include "mkkm/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

namespace mkkm {

using nlohmann::json;

fs::path write_bank(const KernelBank& bank, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir.string() + "': " + ec.message());
  json entries = json::array();
  for (std::size_t p = 0; p < bank.size(); ++p) {
    const GramMatrix& K = bank[p];
    char name[96];
    std::snprintf(name, sizeof name, "k%02zu_%s.mkk", p + 1, K.spec.label().c_str());
    save_kernel_binary(K.values, dir / name);
    entries.push_back({{"file", name},
                       {"family", to_string(K.spec.family)},
                       {"c", K.spec.c},
                       {"a", K.spec.a},
                       {"b", K.spec.b},
                       {"normalized", K.normalized},
                       {"scaled", K.scaled}});
  }
  json manifest = {{"format", "MKK1"}, {"n", bank.n()}, {"m", bank.size()}, {"kernels", entries}};
  const fs::path path = dir / "bank.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << manifest.dump(2) << '\n';
  if (!out) throw Error("write to '" + path.string() + "' failed");
  return path;
}

KernelBank load_bank(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error("cannot open '" + manifest.string() + "' for reading");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(manifest.string() + ": invalid JSON: " + e.what());
  }
  if (!j.contains("kernels") || !j["kernels"].is_array() || j["kernels"].empty())
    throw Error(manifest.string() + ": no kernels listed");
  KernelBank bank;
  for (const auto& e : j["kernels"]) {
    GramMatrix K = load_kernel(manifest.parent_path() / e.at("file").get<std::string>());
    KernelSpec spec;
    spec.family = kernel_family_from_string(e.value("family", "precomputed"));
    spec.c = e.value("c", 0.0);
    spec.a = e.value("a", 0.0);
    spec.b = e.value("b", 0);
    K.spec = spec;
    K.normalized = e.value("normalized", false);
    K.scaled = e.value("scaled", false);
    bank.kernels.push_back(std::move(K));
  }
  validate_bank(bank);
  return bank;
}

Dataset load_dataset(const RunConfig& config) {
  Dataset data;
  data.name = config.dataset;
  if (config.features) {
    const FeatureMatrix X = load_features(*config.features, config.features_header);
    data.bank = standard_bank(X, config.normalize.value_or(true), config.scale.value_or(true));
  } else {
    if (config.bank) data.bank = load_bank(*config.bank);
    else
      for (const auto& path : config.kernels) data.bank.kernels.push_back(load_kernel(path));
    for (auto& K : data.bank.kernels) {
      if (config.normalize.value_or(false) && !K.normalized) K = normalize_gram(K);
      if (config.scale.value_or(false) && !K.scaled) K = scale_gram(K);
    }
  }
  validate_bank(data.bank);
  if (config.labels) {
    data.labels = load_labels(*config.labels);
    if (data.labels->size() != static_cast<std::size_t>(data.bank.n()))
      throw ConfigError("config.labels: " + std::to_string(data.labels->size()) + " labels for " +
                        std::to_string(data.bank.n()) + " samples");
  }
  if (config.k > data.bank.n())
    throw ConfigError("config.k: k=" + std::to_string(config.k) + " exceeds n=" + std::to_string(data.bank.n()));
  data.relations = compute_relations(data.bank);
  return data;
}

std::vector<Cell> expand_cells(const RunConfig& config) {
  std::vector<Cell> cells;
  for (const auto& algorithm : config.algorithms) {
    if (algorithm == "kcd") {
      for (double a : config.alpha)
        for (double b : config.beta) cells.push_back({algorithm, {{"alpha", a}, {"beta", b}}});
    } else if (algorithm == "mkkm_mr") {
      for (double l : config.lambda) cells.push_back({algorithm, {{"lambda", l}}});
    } else if (algorithm == "kkm") {
      cells.push_back({algorithm, {{"kernel", static_cast<double>(config.kernel_index)}}});
    } else {
      cells.push_back({algorithm, {}});
    }
  }
  return cells;
}

namespace {

void score(ResultRecord& record, const RunConfig& config, const Dataset& data, const std::vector<int>& labels) {
  if (record.labels.empty()) record.labels = labels;
  if (config.metrics && data.labels) record.repetitions.push_back(evaluate(labels, *data.labels));
}

void fill_alternating(ResultRecord& record, const KcdResult& r) {
  record.iterations = r.iterations;
  record.converged = r.converged;
  record.objective_trace = r.objective_trace;
  record.weights.assign(r.weights.data(), r.weights.data() + r.weights.size());
  record.warnings = r.warnings;
  if (r.qp_unconverged > 0)
    record.warnings.push_back(std::to_string(r.qp_unconverged) + " inner QP solve(s) hit the iteration cap");
  if (!r.converged)
    record.warnings.push_back("outer loop stopped at max_outer_iters=" + std::to_string(r.iterations));
}

}  // namespace

ResultRecord run_cell(const Dataset& data, const Cell& cell, const RunConfig& config,
                      const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw Error("run_cell: no repetition seeds");
  if (config.metrics && !data.labels)
    throw ConfigError("config.labels: metrics requested but no labels file given");

  ResultRecord record;
  record.dataset = data.name;
  record.algorithm = cell.algorithm;
  record.params = cell.params;
  const auto start = std::chrono::steady_clock::now();
  const int k = config.k;

  auto discretize_all = [&](const Embedding& embedding) {
    for (std::uint64_t s : seeds) score(record, config, data, discretize(embedding, k, s, config.row_normalize).labels);
  };

  AlternatingOptions options;
  options.k = k;
  options.seed = seeds.front();
  options.epsilon = config.epsilon;
  options.max_outer_iters = config.max_outer_iters;
  options.row_normalize = config.row_normalize;

  if (cell.algorithm == "kkm") {
    if (config.kernel_index >= data.bank.size())
      throw ConfigError("config.kernel_index: " + std::to_string(config.kernel_index) + " is out of range for " +
                        std::to_string(data.bank.size()) + " kernels");
    discretize_all(top_k_eigs(data.bank[config.kernel_index].values, k));
  } else if (cell.algorithm == "a_mkkm") {
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(data.bank.size()),
                                                        1.0 / std::sqrt(static_cast<double>(data.bank.size())));
    discretize_all(top_k_eigs(combine(data.bank, w).values, k));
  } else if (cell.algorithm == "sb_kkm") {
    if (!data.labels) throw ConfigError("config.labels: sb_kkm needs ground-truth labels");
    std::vector<Embedding> embeddings;
    for (const auto& K : data.bank.kernels) embeddings.push_back(top_k_eigs(K.values, k));
    for (std::size_t r = 0; r < seeds.size(); ++r) {
      std::vector<int> best_labels;
      double best_acc = -1.0;
      std::size_t best_index = 0;
      for (std::size_t p = 0; p < embeddings.size(); ++p) {
        auto labels = discretize(embeddings[p], k, seeds[r], config.row_normalize).labels;
        const double acc = accuracy(labels, *data.labels);
        if (acc > best_acc) {
          best_acc = acc;
          best_index = p;
          best_labels = std::move(labels);
        }
      }
      if (r == 0) record.best_kernel = best_index;
      score(record, config, data, best_labels);
    }
  } else if (cell.algorithm == "mkkm") {
    const KcdResult r = mkkm(data.bank, options);
    fill_alternating(record, r);
    discretize_all(r.embedding);
  } else if (cell.algorithm == "mkkm_mr") {
    const KcdResult r = mkkm_mr(data.bank, data.relations.correlation, cell.params.at("lambda"), options);
    fill_alternating(record, r);
    discretize_all(r.embedding);
  } else if (cell.algorithm == "kcd") {
    KcdConfig kc;
    static_cast<AlternatingOptions&>(kc) = options;
    kc.alpha = cell.params.at("alpha");
    kc.beta = cell.params.at("beta");
    const KcdResult r = kcd_mkkm(data.bank, data.relations, kc);
    fill_alternating(record, r);
    discretize_all(r.embedding);
  } else {
    throw ConfigError("config.algorithms: unknown algorithm '" + cell.algorithm + "'");
  }

  if (!record.repetitions.empty()) record.summary = aggregate(record.repetitions);
  record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

BenchOutcome run_bench(const RunConfig& config, int jobs, const fs::path& out_dir, std::ostream* progress) {
  const Dataset data = load_dataset(config);
  if (config.metrics && !data.labels) throw ConfigError("config.labels: metrics requested but no labels file given");
  for (const auto& a : config.algorithms)
    if (a == "sb_kkm" && !data.labels) throw ConfigError("config.labels: sb_kkm needs ground-truth labels");

  BenchOutcome outcome;
  outcome.seeds = expand_seeds(config.seed, static_cast<std::size_t>(config.repetitions));
  const std::vector<Cell> cells = expand_cells(config);
  outcome.records.resize(cells.size());

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      ResultRecord& record = outcome.records[i];
      try {
        record = run_cell(data, cells[i], config, outcome.seeds);
      } catch (const std::exception& e) {
        record = ResultRecord{};
        record.dataset = data.name;
        record.algorithm = cells[i].algorithm;
        record.params = cells[i].params;
        record.error = e.what();
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(log_mutex);
        *progress << "[" << (i + 1) << "/" << cells.size() << "] " << record.algorithm << " " << record.params_label()
                  << (record.ok() ? " ok" : " FAILED: " + record.error) << '\n';
      }
    }
  };

  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& r : outcome.records)
    if (!r.ok()) ++outcome.failures;

  if (config.export_relations) {
    std::vector<std::string> header;
    for (const auto& K : data.bank.kernels) header.push_back(K.spec.label());
    write_csv_matrix(data.relations.correlation, out_dir / (data.name + "_correlation.csv"), header);
    write_csv_matrix(data.relations.dissimilarity, out_dir / (data.name + "_dissimilarity.csv"), header);
  }
  outcome.manifest = persist_results(outcome.records, out_dir, to_json(config), outcome.seeds);
  return outcome;
}

RunConfig config_from_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw ConfigError("cannot open manifest '" + manifest.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(manifest.string() + ": invalid JSON: " + e.what());
  }
  if (!j.contains("config")) throw ConfigError(manifest.string() + ": manifest has no config");
  const json& config = j["config"];
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  if (j.value("config_hash", std::string()) != hash)
    throw ConfigError(manifest.string() + ": config_hash does not match the stored config");
  return parse_run_config(config, manifest.parent_path());
}

}  // namespace mkkm
