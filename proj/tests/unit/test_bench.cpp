#include "mkkm/bench.hpp"
#include "mkkm/error.hpp"
#include "mkkm/random.hpp"
#include "mkkm/synthetic.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace mkkm;
using nlohmann::json;

namespace {

// Small three-blob problem written to disk with its labels.
struct SmallProblem {
  TempDir dir;
  fs::path features;
  fs::path labels;

  SmallProblem() {
    Eigen::MatrixXd centers(2, 3);
    centers << 0, 10, 5,
               0, 0, 8;
    const LabeledData d = make_blobs(centers, 12, 0.5, 5);
    features = dir / "x.csv";
    labels = dir / "y.csv";
    save_features(d.X, features);
    save_labels(d.labels, labels);
  }

  json config(const std::vector<std::string>& algorithms) const {
    return json{{"dataset", "toy"},
                {"features", features.string()},
                {"labels", labels.string()},
                {"k", 3},
                {"algorithms", algorithms},
                {"repetitions", 4},
                {"seed", 99}};
  }
};

std::string all_tables(const fs::path& dir) {
  std::string out;
  std::set<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") files.insert(e.path());
  for (const auto& f : files) out += f.filename().string() + "\n" + read_text(f);
  return out;
}

}  // namespace

TEST(Seeds, SplitmixExpansion) {
  const auto seeds = expand_seeds(0, 3);
  // Reference outputs of splitmix64 from state 0.
  EXPECT_EQ(seeds[0], 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(seeds[1], 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(seeds[2], 0x06C45D188009454FULL);
  EXPECT_EQ(expand_seeds(7, 50).size(), 50u);
  EXPECT_EQ(expand_seeds(7, 5), expand_seeds(7, 5));
}

TEST(Cells, FullGridCounts) {
  RunConfig c;
  c.algorithms = {"kcd"};
  c.alpha = default_alpha_grid();
  c.beta = default_beta_grid();
  const auto cells = expand_cells(c);
  ASSERT_EQ(cells.size(), 90u);
  std::set<std::pair<double, double>> distinct;
  for (const auto& cell : cells) distinct.insert({cell.params.at("alpha"), cell.params.at("beta")});
  EXPECT_EQ(distinct.size(), 90u);

  c.algorithms = {"kkm", "a_mkkm", "sb_kkm", "mkkm", "mkkm_mr", "kcd"};
  c.lambda = default_lambda_grid();
  EXPECT_EQ(expand_cells(c).size(), 1u + 1u + 1u + 1u + 26u + 90u);
}

TEST(Bank, WriteAndLoad) {
  TempDir dir;
  const LabeledData d = three_blob_fixture();
  const KernelBank bank = standard_bank(d.X);
  const fs::path manifest = write_bank(bank, dir / "bank");
  const KernelBank loaded = load_bank(manifest);
  ASSERT_EQ(loaded.size(), 12u);
  for (std::size_t p = 0; p < 12; ++p) {
    EXPECT_EQ(loaded[p].values, bank[p].values);
    EXPECT_EQ(loaded[p].spec, bank[p].spec);
    EXPECT_TRUE(loaded[p].normalized);
  }
}

TEST(Dataset, Validation) {
  SmallProblem p;
  json j = p.config({"kcd"});
  j["k"] = 1000;
  EXPECT_THROW_WITH(load_dataset(parse_run_config(j)), ConfigError, "exceeds n");
  write_text(p.dir / "short.csv", "0\n1\n");
  j = p.config({"kcd"});
  j["labels"] = (p.dir / "short.csv").string();
  EXPECT_THROW_WITH(load_dataset(parse_run_config(j)), ConfigError, "config.labels");
}

TEST(RunCell, RecordShape) {
  SmallProblem p;
  const RunConfig c = parse_run_config(p.config({"kcd"}));
  const Dataset data = load_dataset(c);
  EXPECT_EQ(data.bank.size(), 12u);
  const auto seeds = expand_seeds(c.seed, 4);
  const ResultRecord r = run_cell(data, expand_cells(c).front(), c, seeds);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.repetitions.size(), 4u);
  EXPECT_EQ(r.summary.repetitions, 4);
  EXPECT_EQ(r.weights.size(), 12u);
  EXPECT_FALSE(r.objective_trace.empty());
  EXPECT_EQ(r.labels.size(), 36u);
}

TEST(RunCell, LabelRequirements) {
  SmallProblem p;
  json j = p.config({"sb_kkm"});
  j.erase("labels");
  j["metrics"] = false;
  const RunConfig c = parse_run_config(j);
  const Dataset data = load_dataset(c);
  EXPECT_THROW_WITH(run_cell(data, expand_cells(c).front(), c, {1}), ConfigError, "labels");
  j["algorithms"] = json::array({"kcd"});
  j["metrics"] = true;
  const RunConfig m = parse_run_config(j);
  EXPECT_THROW_WITH(run_cell(data, expand_cells(m).front(), m, {1}), ConfigError, "metrics requested");
}

TEST(Bench, DeterministicAcrossJobCounts) {
  SmallProblem p;
  json j = p.config({"kkm", "a_mkkm", "sb_kkm", "mkkm", "mkkm_mr", "kcd"});
  j["alpha"] = json::array({0.1, 0.5});
  j["beta"] = json::array({std::ldexp(1.0, -10), std::ldexp(1.0, -6)});
  j["lambda"] = json::array({0.25, 4});
  const RunConfig c = parse_run_config(j);
  TempDir out;
  const BenchOutcome a = run_bench(c, 1, out / "a");
  const BenchOutcome b = run_bench(c, 3, out / "b");
  EXPECT_EQ(a.failures, 0);
  EXPECT_EQ(a.records.size(), 1u + 1u + 1u + 1u + 2u + 4u);
  EXPECT_EQ(all_tables(out / "a"), all_tables(out / "b"));
  EXPECT_EQ(read_text(a.manifest), read_text(b.manifest));

  // Replay from the manifest.
  const RunConfig replay = config_from_manifest(a.manifest);
  run_bench(replay, 2, out / "c");
  EXPECT_EQ(all_tables(out / "a"), all_tables(out / "c"));
}

TEST(Bench, FailingCellIsRecorded) {
  SmallProblem p;
  json j = p.config({"kkm", "mkkm"});
  j["kernel_index"] = 99;
  j["export_relations"] = true;
  TempDir out;
  const BenchOutcome o = run_bench(parse_run_config(j), 2, out.path());
  EXPECT_EQ(o.failures, 1);
  EXPECT_FALSE(o.records[0].ok());
  EXPECT_TRUE(o.records[1].ok());
  const std::string acc = read_text(out / "toy_acc.csv");
  EXPECT_EQ(acc.find("\nkkm,"), std::string::npos);
  EXPECT_NE(acc.find("\nmkkm,"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "toy_correlation.csv"));
}

TEST(Bench, ManifestHashIsChecked) {
  SmallProblem p;
  TempDir out;
  const BenchOutcome o = run_bench(parse_run_config(p.config({"a_mkkm"})), 1, out.path());
  json m = json::parse(read_text(o.manifest));
  m["config"]["k"] = 2;
  write_text(out / "tampered.json", m.dump());
  EXPECT_THROW_WITH(config_from_manifest(out / "tampered.json"), ConfigError, "config_hash");
}
