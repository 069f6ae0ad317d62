#include "mkkm/error.hpp"
#include "mkkm/io.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstring>

using namespace mkkm;
using Eigen::MatrixXd;
using nlohmann::json;

TEST(Features, LoadsSamplesAsColumns) {
  TempDir dir;
  write_text(dir / "x.csv", "1,2\n3,4\n5,6\n");
  const FeatureMatrix X = load_features(dir / "x.csv");
  ASSERT_EQ(X.rows(), 2);
  ASSERT_EQ(X.cols(), 3);
  EXPECT_EQ(X(0, 2), 5.0);
  EXPECT_EQ(X(1, 0), 2.0);

  write_text(dir / "h.csv", "a,b\n1,2\n3,4\n");
  EXPECT_EQ(load_features(dir / "h.csv", true).cols(), 2);
}

TEST(Features, RejectsBadInput) {
  TempDir dir;
  write_text(dir / "bad.csv", "1,2\n3,abc\n");
  EXPECT_THROW_WITH(load_features(dir / "bad.csv"), Error, "row 2, column 2");
  write_text(dir / "ragged.csv", "1,2\n3\n");
  EXPECT_THROW_WITH(load_features(dir / "ragged.csv"), Error, "row 2");
  write_text(dir / "nan.csv", "1,nan\n");
  EXPECT_THROW(load_features(dir / "nan.csv"), Error);
  write_text(dir / "empty.csv", "");
  EXPECT_THROW(load_features(dir / "empty.csv"), Error);
  EXPECT_THROW_WITH(load_features(dir / "missing.csv"), Error, "cannot open");
}

TEST(Features, RoundTripIsExact) {
  TempDir dir;
  std::mt19937_64 rng(90);
  MatrixXd X(4, 25);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = oracle::uniform(rng, -1e3, 1e3);
  X(0, 0) = 0.1;
  X(1, 0) = 1e-300;
  save_features(X, dir / "x.csv");
  EXPECT_EQ(load_features(dir / "x.csv"), X);
}

TEST(Labels, HeaderAndRoundTrip) {
  TempDir dir;
  write_text(dir / "l.csv", "label\n0\n2\n1\n");
  EXPECT_EQ(load_labels(dir / "l.csv"), (std::vector<int>{0, 2, 1}));
  save_labels({3, 1, 4, 1, 5}, dir / "out.csv");
  EXPECT_EQ(load_labels(dir / "out.csv"), (std::vector<int>{3, 1, 4, 1, 5}));
  write_text(dir / "bad.csv", "0\nx\n");
  EXPECT_THROW_WITH(load_labels(dir / "bad.csv"), Error, "line 2");
}

TEST(Kernel, CsvIdentity) {
  TempDir dir;
  write_text(dir / "k.csv", "1,0\n0,1\n");
  const GramMatrix G = load_kernel(dir / "k.csv");
  EXPECT_EQ(G.values, MatrixXd::Identity(2, 2));
  EXPECT_EQ(G.spec.family, KernelFamily::precomputed);
}

TEST(Kernel, BinaryRoundTripIsBitIdentical) {
  TempDir dir;
  std::mt19937_64 rng(91);
  const MatrixXd K = oracle::random_symmetric(16, rng);
  save_kernel_binary(K, dir / "k.mkk");
  const GramMatrix G = load_kernel(dir / "k.mkk");
  ASSERT_EQ(G.values.rows(), 16);
  EXPECT_EQ(std::memcmp(G.values.data(), K.data(), sizeof(double) * 256), 0);

  // Layout: magic, uint32 n little-endian, row-major float64.
  const std::string bytes = read_text(dir / "k.mkk");
  ASSERT_EQ(bytes.size(), 4u + 4u + 8u * 256u);
  EXPECT_EQ(bytes.substr(0, 4), "MKK1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 16);
  EXPECT_EQ(bytes[5], 0);
  double k01 = 0.0;
  std::memcpy(&k01, bytes.data() + 8 + 8, 8);
  EXPECT_EQ(k01, K(0, 1));
}

TEST(Kernel, RejectsBadFiles) {
  TempDir dir;
  std::string bytes = "MKK2";
  bytes += std::string("\x02\x00\x00\x00", 4);
  bytes += std::string(32, '\0');
  write_text(dir / "magic.mkk", bytes);
  EXPECT_THROW_WITH(load_kernel(dir / "magic.mkk"), Error, "not an MKK1 file");

  write_text(dir / "short.mkk", std::string("MKK1\x02\x00\x00\x00", 8) + std::string(8, '\0'));
  EXPECT_THROW_WITH(load_kernel(dir / "short.mkk"), Error, "truncated");

  write_text(dir / "asym.csv", "1,0.5\n0.4,1\n");
  EXPECT_THROW_WITH(load_kernel(dir / "asym.csv"), Error, "max deviation");
  write_text(dir / "rect.csv", "1,0,0\n0,1,0\n");
  EXPECT_THROW_WITH(load_kernel(dir / "rect.csv"), Error, "square");
}

namespace {

json minimal_config() {
  return json{{"features", "x.csv"}, {"k", 3}, {"algorithm", "kcd"}};
}

}  // namespace

TEST(Config, DefaultsAndPathResolution) {
  const RunConfig c = parse_run_config(minimal_config(), "/data/run");
  EXPECT_EQ(*c.features, fs::path("/data/run/x.csv"));
  EXPECT_EQ(c.k, 3);
  EXPECT_EQ(c.algorithms, std::vector<std::string>{"kcd"});
  EXPECT_EQ(c.repetitions, 50);
  EXPECT_EQ(c.alpha, std::vector<double>{0.5});
  EXPECT_EQ(c.beta, std::vector<double>{1.0 / 256.0});
  EXPECT_EQ(c.output_dir, fs::path("/data/run/results"));
  EXPECT_FALSE(c.normalize.has_value());
}

TEST(Config, Grids) {
  json j = minimal_config();
  j["alpha"] = "full";
  j["beta"] = "full";
  j["lambda"] = json::array({0.5, 2});
  const RunConfig c = parse_run_config(j);
  EXPECT_EQ(c.alpha.size(), 9u);
  EXPECT_NEAR(c.alpha.front(), 0.1, 1e-15);
  EXPECT_NEAR(c.alpha.back(), 0.9, 1e-15);
  ASSERT_EQ(c.beta.size(), 10u);
  EXPECT_EQ(c.beta.front(), std::ldexp(1.0, -14));
  EXPECT_EQ(c.beta.back(), std::ldexp(1.0, -5));
  EXPECT_EQ(c.lambda, (std::vector<double>{0.5, 2.0}));
  EXPECT_EQ(default_lambda_grid().size(), 26u);
}

TEST(Config, ErrorsNameTheField) {
  auto expect_error = [](json j, const std::string& needle) {
    EXPECT_THROW_WITH(parse_run_config(j), ConfigError, needle);
  };
  json j = minimal_config();
  j["algorithm"] = "spectral";
  expect_error(j, "config.algorithm: unknown algorithm 'spectral'");
  j = minimal_config();
  j["alpha"] = json::array({0.1, "x"});
  expect_error(j, "config.alpha[1]: expected a number");
  j = minimal_config();
  j["alpha"] = json::array();
  expect_error(j, "config.alpha: grid must not be empty");
  j = minimal_config();
  j["repetitions"] = 0;
  expect_error(j, "config.repetitions");
  j = minimal_config();
  j.erase("k");
  expect_error(j, "config.k: required");
  j = minimal_config();
  j["kernels"] = json::array({"a.csv"});
  expect_error(j, "exactly one of");
  j = minimal_config();
  j["colour"] = 1;
  expect_error(j, "config.colour: unknown field");
  j = minimal_config();
  j["seed"] = -3;
  expect_error(j, "config.seed");
}

TEST(Config, JsonRoundTrip) {
  json j = minimal_config();
  j["alpha"] = json::array({0.1, 0.3});
  j["seed"] = 12345;
  j["normalize"] = false;
  const RunConfig a = parse_run_config(j, "/base");
  const RunConfig b = parse_run_config(to_json(a));
  EXPECT_EQ(b.features, a.features);
  EXPECT_EQ(b.alpha, a.alpha);
  EXPECT_EQ(b.seed, a.seed);
  EXPECT_EQ(b.normalize, a.normalize);
  EXPECT_EQ(b.output_dir, a.output_dir);
  EXPECT_EQ(to_json(b), to_json(a));
}

TEST(Records, ParamsLabel) {
  ResultRecord r;
  EXPECT_EQ(r.params_label(), "-");
  r.params = {{"beta", 0.00390625}, {"alpha", 0.1}};
  EXPECT_EQ(r.params_label(), "alpha=0.10000000000000001;beta=0.00390625");
}

TEST(Persist, EmptyRecordList) {
  TempDir dir;
  const fs::path manifest = persist_results({}, dir.path(), json::object(), {});
  const json m = json::parse(read_text(manifest));
  EXPECT_EQ(m["entries"], 0);
  EXPECT_TRUE(m["tables"].empty());
  for (const auto& e : fs::directory_iterator(dir.path())) EXPECT_NE(e.path().extension(), ".csv") << e.path();
}

TEST(Persist, OneRecord) {
  TempDir dir;
  ResultRecord r;
  r.dataset = "toy";
  r.algorithm = "kcd";
  r.params = {{"alpha", 0.5}, {"beta", 0.00390625}};
  r.repetitions = {{0.9, 0.8, 0.9, 0.7}, {0.7, 0.6, 0.7, 0.5}};
  r.summary = aggregate(r.repetitions);
  r.weights = {0.25, 0.75};
  const fs::path manifest = persist_results({r}, dir.path(), json{{"k", 2}}, {11, 12});

  EXPECT_NEAR(r.summary.std.acc, std::sqrt(0.02), 1e-15);
  char sd[32];
  std::snprintf(sd, sizeof sd, "%.17g", r.summary.std.acc);
  EXPECT_EQ(read_text(dir / "toy_acc.csv"),
            "algorithm,params,mean,std,mean\xC2\xB1std,repetitions\n"
            "kcd,alpha=0.5;beta=0.00390625,0.80000000000000004," + std::string(sd) + ",0.8000\xC2\xB1" "0.1414,2\n");
  const json m = json::parse(read_text(manifest));
  EXPECT_EQ(m["entries"], 1);
  EXPECT_EQ(m["seeds"], json::array({11, 12}));
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 16u);
  EXPECT_EQ(m["tables"].size(), 6u);
  EXPECT_TRUE(fs::exists(dir / "toy_weights.csv"));
  EXPECT_TRUE(fs::exists(dir / "timings.json"));
  EXPECT_FALSE(m["records"][0].contains("seconds"));
}

TEST(Persist, BestCellPerAlgorithm) {
  TempDir dir;
  std::vector<ResultRecord> records;
  for (double acc : {0.6, 0.9, 0.9, 0.4}) {
    ResultRecord r;
    r.dataset = "d";
    r.algorithm = "mkkm_mr";
    r.params = {{"lambda", acc + static_cast<double>(records.size())}};
    r.repetitions = {{acc, 0.5, 0.5, 0.5}};
    r.summary = aggregate(r.repetitions);
    records.push_back(r);
  }
  ResultRecord failed;
  failed.dataset = "d";
  failed.algorithm = "mkkm_mr";
  failed.error = "boom";
  records.push_back(failed);
  const json m = json::parse(read_text(persist_results(records, dir.path(), json::object(), {1})));
  // Ties keep the first cell.
  EXPECT_NE(read_text(dir / "d_acc.csv").find("lambda=1.8999999999999999"), std::string::npos);
  EXPECT_EQ(m["failures"].size(), 1u);
  EXPECT_NE(read_text(dir / "d_cells.csv").find("failed"), std::string::npos);
}

TEST(Hash, Fnv1a) {
  EXPECT_EQ(fnv1a64(""), 0xCBF29CE484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xAF63DC4C8601EC8CULL);
}
