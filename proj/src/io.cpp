#include "mkkm/io.hpp"

#include "mkkm/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mkkm {

using Eigen::Index;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace

Eigen::MatrixXd read_csv_matrix(const fs::path& path, bool has_header) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto cells = split_csv_line(line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v)
        throw Error(path.string() + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                    ": cannot parse '" + cells[c] + "' as a number");
      if (!std::isfinite(*v))
        throw Error(path.string() + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                    ": NaN or Inf is not allowed");
      row.push_back(*v);
    }
    if (rows.empty()) width = row.size();
    if (row.size() != width)
      throw Error(path.string() + ": row " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                  " columns, expected " + std::to_string(width) + " (ragged rows)");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(path.string() + ": no data rows");
  Eigen::MatrixXd A(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c) A(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return A;
}

void write_csv_matrix(const Eigen::MatrixXd& A, const fs::path& path, const std::vector<std::string>& header) {
  auto out = open_out(path);
  if (!header.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
  }
  for (Index r = 0; r < A.rows(); ++r) {
    for (Index c = 0; c < A.cols(); ++c) out << (c ? "," : "") << format_double(A(r, c));
    out << '\n';
  }
  finish(out, path);
}

FeatureMatrix load_features(const fs::path& path, bool has_header) {
  return read_csv_matrix(path, has_header).transpose();
}

void save_features(const FeatureMatrix& X, const fs::path& path) { write_csv_matrix(X.transpose(), path); }

std::vector<int> load_labels(const fs::path& path) {
  auto in = open_in(path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string cell = trim(line);
    if (cell.empty()) continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      if (labels.empty() && line_no == 1) continue;  // header
      throw Error(path.string() + ": line " + std::to_string(line_no) + ": '" + cell + "' is not an integer label");
    }
    labels.push_back(v);
  }
  if (labels.empty()) throw Error(path.string() + ": no labels");
  return labels;
}

void save_labels(const std::vector<int>& labels, const fs::path& path) {
  auto out = open_out(path);
  for (int l : labels) out << l << '\n';
  finish(out, path);
}

void save_kernel_binary(const Eigen::MatrixXd& K, const fs::path& path) {
  if (K.rows() != K.cols()) throw Error("save_kernel_binary: kernel is not square");
  auto out = open_out(path, std::ios::binary);
  out.write(kKernelMagic, 4);
  const auto n = static_cast<std::uint32_t>(K.rows());
  unsigned char header[4];
  for (int i = 0; i < 4; ++i) header[i] = static_cast<unsigned char>((n >> (8 * i)) & 0xFFu);
  out.write(reinterpret_cast<const char*>(header), 4);
  std::vector<unsigned char> buffer(static_cast<std::size_t>(K.cols()) * 8);
  for (Index r = 0; r < K.rows(); ++r) {
    for (Index c = 0; c < K.cols(); ++c) {
      const auto bits = std::bit_cast<std::uint64_t>(K(r, c));
      for (int b = 0; b < 8; ++b)
        buffer[static_cast<std::size_t>(c) * 8 + static_cast<std::size_t>(b)] =
            static_cast<unsigned char>((bits >> (8 * b)) & 0xFFu);
    }
    out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
  }
  finish(out, path);
}

namespace {

Eigen::MatrixXd read_kernel_binary(std::ifstream& in, const fs::path& path) {
  unsigned char header[4];
  if (!in.read(reinterpret_cast<char*>(header), 4)) throw Error(path.string() + ": truncated MKK1 header");
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(header[i]) << (8 * i);
  if (n == 0) throw Error(path.string() + ": MKK1 file declares n = 0");
  Eigen::MatrixXd K(n, n);
  std::vector<unsigned char> buffer(static_cast<std::size_t>(n) * 8);
  for (Index r = 0; r < K.rows(); ++r) {
    if (!in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size())))
      throw Error(path.string() + ": truncated MKK1 payload");
    for (Index c = 0; c < K.cols(); ++c) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b)
        bits |= static_cast<std::uint64_t>(buffer[static_cast<std::size_t>(c) * 8 + static_cast<std::size_t>(b)]) << (8 * b);
      K(r, c) = std::bit_cast<double>(bits);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw Error(path.string() + ": trailing bytes after MKK1 payload");
  return K;
}

bool looks_binary(const std::string& prefix) {
  return std::any_of(prefix.begin(), prefix.end(), [](char ch) {
    const auto u = static_cast<unsigned char>(ch);
    return u < 0x09 || (u > 0x0D && u < 0x20) || u >= 0x7F;
  });
}

}  // namespace

GramMatrix load_kernel(const fs::path& path) {
  Eigen::MatrixXd K;
  {
    auto in = open_in(path, std::ios::binary);
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    const std::string prefix(magic, static_cast<std::size_t>(in.gcount()));
    if (prefix == std::string(kKernelMagic, 4)) {
      K = read_kernel_binary(in, path);
    } else {
      // Anything with control bytes near the start is a binary file, so it
      // is reported against the binary format rather than as bad CSV.
      char head[60];
      in.read(head, sizeof head);
      if (looks_binary(prefix + std::string(head, static_cast<std::size_t>(in.gcount()))))
        throw Error(path.string() + ": not an MKK1 file (bad magic)");
    }
  }
  if (K.size() == 0) K = read_csv_matrix(path);
  if (K.rows() != K.cols())
    throw Error(path.string() + ": kernel must be square, got " + std::to_string(K.rows()) + "x" + std::to_string(K.cols()));
  if (!K.allFinite()) throw Error(path.string() + ": kernel contains NaN or Inf");
  const double dev = max_asymmetry(K);
  if (dev > 1e-8) {
    std::ostringstream os;
    os << path.string() << ": kernel is not symmetric (max deviation " << dev << ")";
    throw Error(os.str());
  }
  GramMatrix G;
  G.values = std::move(K);
  G.spec = KernelSpec::precomputed();
  return G;
}

// ---------------------------------------------------------------------------

bool is_known_algorithm(const std::string& name) {
  return std::find(std::begin(kAlgorithmNames), std::end(kAlgorithmNames), name) != std::end(kAlgorithmNames);
}

std::vector<double> default_alpha_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 9; ++i) g.push_back(i / 10.0);
  return g;
}

std::vector<double> default_beta_grid() {
  std::vector<double> g;
  for (int e = -14; e <= -5; ++e) g.push_back(std::ldexp(1.0, e));
  return g;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> g;
  for (int e = -15; e <= 10; ++e) g.push_back(std::ldexp(1.0, e));
  return g;
}

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& message) {
  throw ConfigError("config." + field + ": " + message);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) config_error(field, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) config_error(field, "expected true or false");
  return j.get<bool>();
}

long long get_int(const json& j, const std::string& field, long long lo) {
  if (!j.is_number_integer()) config_error(field, "expected an integer");
  const auto v = j.get<long long>();
  if (v < lo) config_error(field, "must be at least " + std::to_string(lo));
  return v;
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) config_error(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(field, "must be finite");
  return v;
}

std::vector<double> get_grid(const json& j, const std::string& field, std::vector<double> (*full_grid)()) {
  if (j.is_string()) {
    if (j.get<std::string>() == "full") return full_grid();
    config_error(field, "expected a number, an array of numbers, or \"full\"");
  }
  if (j.is_number()) {
    const double v = get_number(j, field);
    if (v < 0.0) config_error(field, "must be nonnegative");
    return {v};
  }
  if (!j.is_array()) config_error(field, "expected a number, an array of numbers, or \"full\"");
  if (j.empty()) config_error(field, "grid must not be empty");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    const double v = get_number(j[i], f);
    if (v < 0.0) config_error(f, "must be nonnegative");
    out.push_back(v);
  }
  return out;
}

}  // namespace

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::set<std::string> known = {
      "dataset", "features", "features_header", "kernels", "bank", "labels", "k", "algorithm", "algorithms",
      "alpha", "beta", "lambda", "kernel_index", "repetitions", "seed", "epsilon", "max_outer_iters",
      "normalize", "scale", "row_normalize", "metrics", "export_relations", "output_dir"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) config_error(key, "unknown field");

  RunConfig c;
  if (j.contains("dataset")) c.dataset = get_string(j["dataset"], "dataset");
  if (c.dataset.empty() || c.dataset.find_first_of("/\\") != std::string::npos)
    config_error("dataset", "must be a nonempty name without path separators");

  int sources = 0;
  if (j.contains("features") && !j["features"].is_null()) {
    c.features = resolve(base_dir, get_string(j["features"], "features"));
    ++sources;
  }
  if (j.contains("features_header")) c.features_header = get_bool(j["features_header"], "features_header");
  if (j.contains("kernels") && !j["kernels"].is_null()) {
    const auto& ks = j["kernels"];
    if (!ks.is_array() || ks.empty()) config_error("kernels", "expected a nonempty array of paths");
    for (std::size_t i = 0; i < ks.size(); ++i)
      c.kernels.push_back(resolve(base_dir, get_string(ks[i], "kernels[" + std::to_string(i) + "]")));
    ++sources;
  }
  if (j.contains("bank") && !j["bank"].is_null()) {
    c.bank = resolve(base_dir, get_string(j["bank"], "bank"));
    ++sources;
  }
  if (sources != 1) config_error("features", "exactly one of features, kernels, bank must be given");
  if (j.contains("labels") && !j["labels"].is_null()) c.labels = resolve(base_dir, get_string(j["labels"], "labels"));

  if (!j.contains("k")) config_error("k", "required field is missing");
  c.k = static_cast<int>(get_int(j["k"], "k", 1));

  if (j.contains("algorithm") && j.contains("algorithms")) config_error("algorithm", "give either algorithm or algorithms");
  if (j.contains("algorithm")) {
    c.algorithms.push_back(get_string(j["algorithm"], "algorithm"));
  } else if (j.contains("algorithms")) {
    const auto& as = j["algorithms"];
    if (!as.is_array() || as.empty()) config_error("algorithms", "expected a nonempty array of names");
    for (std::size_t i = 0; i < as.size(); ++i) c.algorithms.push_back(get_string(as[i], "algorithms[" + std::to_string(i) + "]"));
  } else {
    config_error("algorithms", "required field is missing");
  }
  for (std::size_t i = 0; i < c.algorithms.size(); ++i)
    if (!is_known_algorithm(c.algorithms[i]))
      config_error(j.contains("algorithm") ? "algorithm" : "algorithms[" + std::to_string(i) + "]",
                   "unknown algorithm '" + c.algorithms[i] + "'");

  if (j.contains("alpha")) c.alpha = get_grid(j["alpha"], "alpha", default_alpha_grid);
  if (j.contains("beta")) c.beta = get_grid(j["beta"], "beta", default_beta_grid);
  if (j.contains("lambda")) c.lambda = get_grid(j["lambda"], "lambda", default_lambda_grid);
  if (j.contains("kernel_index")) c.kernel_index = static_cast<std::size_t>(get_int(j["kernel_index"], "kernel_index", 0));
  if (j.contains("repetitions")) c.repetitions = static_cast<int>(get_int(j["repetitions"], "repetitions", 1));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      config_error("seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("epsilon") && !j["epsilon"].is_null()) {
    const double e = get_number(j["epsilon"], "epsilon");
    if (e < 0.0) config_error("epsilon", "must be nonnegative");
    c.epsilon = e;
  }
  if (j.contains("max_outer_iters")) c.max_outer_iters = static_cast<int>(get_int(j["max_outer_iters"], "max_outer_iters", 1));
  if (j.contains("normalize") && !j["normalize"].is_null()) c.normalize = get_bool(j["normalize"], "normalize");
  if (j.contains("scale") && !j["scale"].is_null()) c.scale = get_bool(j["scale"], "scale");
  if (j.contains("row_normalize")) c.row_normalize = get_bool(j["row_normalize"], "row_normalize");
  if (j.contains("metrics")) c.metrics = get_bool(j["metrics"], "metrics");
  if (j.contains("export_relations")) c.export_relations = get_bool(j["export_relations"], "export_relations");
  if (j.contains("output_dir")) c.output_dir = resolve(base_dir, get_string(j["output_dir"], "output_dir"));
  else if (!base_dir.empty()) c.output_dir = resolve(base_dir, c.output_dir.string());
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  auto in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

json to_json(const RunConfig& c) {
  json j;
  j["dataset"] = c.dataset;
  j["features"] = c.features ? json(c.features->string()) : json(nullptr);
  j["features_header"] = c.features_header;
  if (!c.kernels.empty()) {
    json ks = json::array();
    for (const auto& k : c.kernels) ks.push_back(k.string());
    j["kernels"] = ks;
  }
  j["bank"] = c.bank ? json(c.bank->string()) : json(nullptr);
  j["labels"] = c.labels ? json(c.labels->string()) : json(nullptr);
  j["k"] = c.k;
  j["algorithms"] = c.algorithms;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["lambda"] = c.lambda;
  j["kernel_index"] = c.kernel_index;
  j["repetitions"] = c.repetitions;
  j["seed"] = c.seed;
  j["epsilon"] = c.epsilon ? json(*c.epsilon) : json(nullptr);
  j["max_outer_iters"] = c.max_outer_iters;
  j["normalize"] = c.normalize ? json(*c.normalize) : json(nullptr);
  j["scale"] = c.scale ? json(*c.scale) : json(nullptr);
  j["row_normalize"] = c.row_normalize;
  j["metrics"] = c.metrics;
  j["export_relations"] = c.export_relations;
  j["output_dir"] = c.output_dir.string();
  return j;
}

// ---------------------------------------------------------------------------

std::string ResultRecord::params_label() const {
  std::string out;
  for (const auto& [key, value] : params) {
    if (!out.empty()) out += ';';
    out += key + "=" + format_double(value);
  }
  return out.empty() ? "-" : out;
}

namespace {

json metrics_json(const MetricValues& v) { return {{"acc", v.acc}, {"nmi", v.nmi}, {"pur", v.pur}, {"ari", v.ari}}; }

std::string mean_pm_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f\xC2\xB1%.4f", mean, std);
  return buf;
}

}  // namespace

json to_json(const ResultRecord& r, bool include_timing) {
  json j;
  j["dataset"] = r.dataset;
  j["algorithm"] = r.algorithm;
  j["params"] = r.params;
  j["status"] = r.ok() ? "ok" : "failed";
  if (!r.ok()) j["error"] = r.error;
  json reps = json::array();
  for (const auto& v : r.repetitions) reps.push_back(metrics_json(v));
  j["repetitions"] = reps;
  if (!r.repetitions.empty()) {
    j["mean"] = metrics_json(r.summary.mean);
    j["std"] = metrics_json(r.summary.std);
    j["std_divisor"] = MetricsReport::kStdDivisor;
  }
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["objective_trace"] = r.objective_trace;
  j["weights"] = r.weights;
  j["best_kernel"] = r.best_kernel ? json(*r.best_kernel) : json(nullptr);
  j["warnings"] = r.warnings;
  if (include_timing) j["seconds"] = r.seconds;
  return j;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

fs::path persist_results(const std::vector<ResultRecord>& records, const fs::path& dir, const json& config,
                         const std::vector<std::uint64_t>& seeds) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());

  std::vector<std::string> datasets;
  for (const auto& r : records)
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);

  json tables = json::array();
  json failures = json::array();
  json timings = json::object();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    timings[std::to_string(i) + ":" + r.dataset + ":" + r.algorithm + ":" + r.params_label()] = r.seconds;
    if (!r.ok()) failures.push_back({{"dataset", r.dataset}, {"algorithm", r.algorithm}, {"params", r.params_label()}, {"error", r.error}});
  }

  for (const auto& dataset : datasets) {
    std::vector<const ResultRecord*> rows;
    std::vector<std::string> algorithms;
    for (const auto& r : records) {
      if (r.dataset != dataset) continue;
      rows.push_back(&r);
      if (std::find(algorithms.begin(), algorithms.end(), r.algorithm) == algorithms.end()) algorithms.push_back(r.algorithm);
    }

    // Per-metric tables at each algorithm's best cell for that metric.
    std::map<std::string, const ResultRecord*> best_acc;
    for (const char* metric : kMetricNames) {
      const fs::path path = dir / (dataset + "_" + metric + ".csv");
      auto out = open_out(path);
      out << "algorithm,params,mean,std,mean\xC2\xB1std,repetitions\n";
      for (const auto& algorithm : algorithms) {
        const ResultRecord* best = nullptr;
        for (const ResultRecord* r : rows) {
          if (r->algorithm != algorithm || !r->ok() || r->repetitions.empty()) continue;
          if (!best || metric_by_name(r->summary.mean, metric) > metric_by_name(best->summary.mean, metric)) best = r;
        }
        if (!best) continue;
        if (std::string(metric) == "acc") best_acc[algorithm] = best;
        const double mean = metric_by_name(best->summary.mean, metric);
        const double std = metric_by_name(best->summary.std, metric);
        out << algorithm << ',' << best->params_label() << ',' << format_double(mean) << ',' << format_double(std) << ','
            << mean_pm_std(mean, std) << ',' << best->summary.repetitions << '\n';
      }
      finish(out, path);
      tables.push_back(path.filename().string());
    }

    {
      const fs::path path = dir / (dataset + "_cells.csv");
      auto out = open_out(path);
      out << "algorithm,params,status,acc_mean,acc_std,nmi_mean,nmi_std,pur_mean,pur_std,ari_mean,ari_std,iterations,converged,final_objective\n";
      for (const ResultRecord* r : rows) {
        out << r->algorithm << ',' << r->params_label() << ',' << (r->ok() ? "ok" : "failed");
        if (r->ok() && !r->repetitions.empty()) {
          for (const char* metric : kMetricNames)
            out << ',' << format_double(metric_by_name(r->summary.mean, metric)) << ','
                << format_double(metric_by_name(r->summary.std, metric));
        } else {
          out << ",,,,,,,,";
        }
        out << ',' << r->iterations << ',' << (r->converged ? "true" : "false") << ','
            << (r->objective_trace.empty() ? std::string() : format_double(r->objective_trace.back())) << '\n';
      }
      finish(out, path);
      tables.push_back(path.filename().string());
    }

    {
      const fs::path path = dir / (dataset + "_weights.csv");
      auto out = open_out(path);
      std::size_t m = 0;
      for (const auto& [alg, r] : best_acc) m = std::max(m, r->weights.size());
      out << "algorithm,params";
      for (std::size_t p = 0; p < m; ++p) out << ",w" << (p + 1);
      out << '\n';
      for (const auto& algorithm : algorithms) {
        const auto it = best_acc.find(algorithm);
        if (it == best_acc.end() || it->second->weights.empty()) continue;
        out << algorithm << ',' << it->second->params_label();
        for (double w : it->second->weights) out << ',' << format_double(w);
        out << '\n';
      }
      finish(out, path);
      tables.push_back(path.filename().string());
    }
  }

  json records_json = json::array();
  for (const auto& r : records) records_json.push_back(to_json(r, false));

  json manifest;
  manifest["config"] = config;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  manifest["config_hash"] = hash;
  manifest["seeds"] = seeds;
  manifest["seed_expansion"] = "splitmix64";
  manifest["tables"] = tables;
  manifest["entries"] = records.size();
  manifest["failures"] = failures;
  manifest["records"] = records_json;

  const fs::path manifest_path = dir / "manifest.json";
  {
    auto out = open_out(manifest_path);
    out << manifest.dump(2) << '\n';
    finish(out, manifest_path);
  }
  {
    const fs::path path = dir / "timings.json";
    auto out = open_out(path);
    out << timings.dump(2) << '\n';
    finish(out, path);
  }
  return manifest_path;
}

}  // namespace mkkm
