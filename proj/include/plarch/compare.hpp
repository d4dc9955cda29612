#pragma once

// End-to-end comparison run: load or generate telemetry, fill gaps, run each
// requested factorization with a shared k and seed, and write plot-ready
// artifacts plus a JSON report.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plarch/archetypes.hpp"
#include "plarch/cmeans.hpp"
#include "plarch/csv.hpp"
#include "plarch/factorization.hpp"
#include "plarch/kmeans.hpp"
#include "plarch/nmf.hpp"
#include "plarch/pca.hpp"
#include "plarch/synthetic.hpp"
#include "plarch/telemetry.hpp"

namespace plarch {

struct RunConfig {
  // Exactly one input: a telemetry CSV with its schedule, or a synthetic spec.
  std::optional<std::string> input_csv;
  std::optional<std::string> schedule_csv;
  std::optional<std::string> synthetic_spec;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  std::size_t k = 8;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::optional<std::size_t> max_iterations;
  std::optional<double> tolerance;
  std::optional<double> fuzzifier_m;
  std::optional<bool> center_pca;

  SolverOptions solver_options() const {
    SolverOptions o;
    o.k = k;
    o.seed = RandomSeed{seed};
    if (max_iterations) o.max_iterations = *max_iterations;
    if (tolerance) o.tolerance = *tolerance;
    if (fuzzifier_m) o.fuzzifier_m = *fuzzifier_m;
    if (center_pca) o.center_pca = *center_pca;
    return o;
  }
};

inline void validate(const RunConfig& config) {
  if (config.input_csv && config.synthetic_spec)
    throw ConfigError("input", "give either --input or --synthetic, not both");
  if (!config.input_csv && !config.synthetic_spec)
    throw ConfigError("input", "one of --input or --synthetic is required");
  if (config.input_csv && !config.schedule_csv)
    throw ConfigError("schedule", "--input requires --schedule");
  if (config.methods.empty()) throw ConfigError("methods", "at least one method is required");
  for (std::size_t i = 0; i < config.methods.size(); ++i)
    for (std::size_t j = i + 1; j < config.methods.size(); ++j)
      if (config.methods[i] == config.methods[j])
        throw ConfigError("methods", "duplicate method " + std::string(to_string(config.methods[i])));
  if (config.k < 2) throw ConfigError("k", "must be at least 2");
  if (config.output_dir.empty()) throw ConfigError("out", "output directory is required");
  if (config.max_iterations && *config.max_iterations == 0)
    throw ConfigError("max_iterations", "must be positive");
  if (config.tolerance && !(*config.tolerance > 0.0)) throw ConfigError("tolerance", "must be positive");
  if (config.fuzzifier_m && !(*config.fuzzifier_m > 1.0))
    throw ConfigError("fuzzifier_m", "must be greater than 1");
}

struct MethodReport {
  Method method = Method::kmeans;
  bool skipped = false;
  std::string skip_reason;
  FactorizationResult result;
  LegalityReport legality;
  HardAssignment assignment;
  double wall_time_ms = 0.0;
};

struct ComparisonReport {
  std::size_t days = 0;
  std::size_t players = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  ExpansionSchedule schedule;
  RunConfig config;
  std::vector<std::int64_t> day_axis;
  std::vector<std::string> player_ids;
  std::vector<std::size_t> planted_indices;  // synthetic input only
  std::vector<MethodReport> methods;
};

inline FactorizationResult run_method(Method m, const DenseMatrix& v, const SolverOptions& opts) {
  switch (m) {
    case Method::kmeans: return kmeans(v, opts);
    case Method::cmeans: return cmeans(v, opts);
    case Method::nmf: return nmf(v, opts);
    case Method::pca: return pca(v, opts);
    case Method::archetypal: return archetypal_analysis(v, opts);
  }
  throw ConfigError("methods", "unknown method");
}

// Writes `day_index,basis_0,...,basis_{k-1}`, one row per day.
inline void export_basis_vectors(const FactorizationResult& result,
                                 const std::vector<std::int64_t>& day_axis, const std::string& path) {
  if (result.W.rows() != day_axis.size())
    throw DimensionError("export_basis_vectors: day axis length differs from basis length");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "day_index";
  for (std::size_t j = 0; j < result.W.cols(); ++j) out << ",basis_" << j;
  out << '\n';
  for (std::size_t r = 0; r < result.W.rows(); ++r) {
    out << day_axis[r];
    for (std::size_t j = 0; j < result.W.cols(); ++j) out << ',' << csv::format_double(result.W(r, j));
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

struct BasisTable {
  std::vector<std::int64_t> day_axis;
  DenseMatrix W;
};

inline BasisTable read_basis_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw EmptyInputError(path + " is empty");
  const auto header = csv::split(line);
  if (header.empty() || header[0] != "day_index") throw ParseError(path + ": bad header", 1);
  const std::size_t k = header.size() - 1;
  BasisTable table;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != k + 1) throw ParseError(path + ": wrong field count", line_no);
    const auto day = csv::parse_int(f[0]);
    if (!day) throw ParseError(path + ": bad day_index", line_no);
    table.day_axis.push_back(*day);
    for (std::size_t j = 1; j <= k; ++j) {
      const auto v = csv::parse_double(f[j]);
      if (!v) throw ParseError(path + ": bad number", line_no);
      values.push_back(*v);
    }
  }
  table.W = DenseMatrix(table.day_axis.size(), k, std::move(values));
  return table;
}

// Writes `method,cluster_index,count` for every method that ran.
inline void export_assignment_histogram(const ComparisonReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "method,cluster_index,count\n";
  for (const auto& m : report.methods) {
    if (m.skipped) continue;
    for (std::size_t j = 0; j < m.assignment.histogram.size(); ++j)
      out << to_string(m.method) << ',' << j << ',' << m.assignment.histogram[j] << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

// Writes `player_id,<method>...` with each player's hard label per method.
inline void export_assignments(const ComparisonReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "player_id";
  for (const auto& m : report.methods)
    if (!m.skipped) out << ',' << to_string(m.method);
  out << '\n';
  for (std::size_t c = 0; c < report.players; ++c) {
    out << report.player_ids[c];
    for (const auto& m : report.methods)
      if (!m.skipped) out << ',' << m.assignment.labels[c];
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

// JSON form of the report. Wall times are left out so that identical runs
// produce identical files.
inline nlohmann::ordered_json report_to_json(const ComparisonReport& report) {
  using json = nlohmann::ordered_json;
  json j;
  j["dataset"] = {{"days", report.days},
                  {"players", report.players},
                  {"first_day", report.day_axis.empty() ? 0 : report.day_axis.front()},
                  {"last_day", report.day_axis.empty() ? 0 : report.day_axis.back()}};
  if (!report.planted_indices.empty()) j["dataset"]["planted_indices"] = report.planted_indices;
  j["seed"] = report.seed;
  j["k"] = report.k;
  json schedule = json::array();
  for (const auto& b : report.schedule.breakpoints())
    schedule.push_back({{"day_index", b.day}, {"level_cap", b.cap}});
  j["schedule"] = schedule;

  const auto& c = report.config;
  const SolverOptions opts = c.solver_options();
  json cfg;
  if (c.input_csv) cfg["input"] = *c.input_csv;
  if (c.schedule_csv) cfg["schedule"] = *c.schedule_csv;
  if (c.synthetic_spec) cfg["synthetic"] = *c.synthetic_spec;
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(std::string(to_string(m)));
  cfg["methods"] = methods;
  cfg["k"] = c.k;
  cfg["seed"] = c.seed;
  cfg["max_iterations"] = opts.max_iterations;
  cfg["tolerance"] = opts.tolerance;
  cfg["fuzzifier_m"] = opts.fuzzifier_m;
  cfg["center_pca"] = opts.center_pca;
  cfg["error_measure"] = "frobenius_norm";
  j["config"] = cfg;

  json entries = json::array();
  for (const auto& m : report.methods) {
    json e;
    e["method"] = std::string(to_string(m.method));
    if (m.skipped) {
      e["skipped"] = true;
      e["reason"] = m.skip_reason;
      entries.push_back(e);
      continue;
    }
    e["skipped"] = false;
    e["reconstruction_error"] = m.result.reconstruction_error;
    e["iterations"] = m.result.iterations;
    e["converged"] = m.result.converged;
    if (!m.result.source_columns.empty()) {
      e["source_columns"] = m.result.source_columns;
      json ids = json::array();
      for (std::size_t col : m.result.source_columns) ids.push_back(report.player_ids[col]);
      e["source_players"] = ids;
    }
    json vectors = json::array();
    for (const auto& v : m.legality.per_vector)
      vectors.push_back({{"monotonicity_violations", v.monotonicity_violations},
                         {"range_violations", v.range_violations},
                         {"is_legal", v.is_legal}});
    e["legality"] = {{"aggregate_legality", m.legality.aggregate_legality}, {"per_vector", vectors}};
    e["histogram"] = m.assignment.histogram;
    entries.push_back(e);
  }
  j["methods"] = entries;
  return j;
}

// Runs the comparison and writes into config.output_dir:
//   report.json, histogram.csv, assignments.csv, basis_<method>.csv
inline ComparisonReport run_compare(const RunConfig& config) {
  validate(config);
  ComparisonReport report;
  report.config = config;
  report.k = config.k;
  report.seed = config.seed;

  TelemetryMatrix telemetry;
  if (config.synthetic_spec) {
    const SyntheticSpec spec = load_synthetic_spec(*config.synthetic_spec);
    SyntheticPopulation pop = generate_population(spec);
    report.schedule = spec.schedule;
    report.planted_indices = pop.planted_indices;
    telemetry = std::move(pop.telemetry);
  } else {
    report.schedule = load_schedule(*config.schedule_csv);
    telemetry = load_telemetry(*config.input_csv, report.schedule);
  }
  telemetry = interpolate_missing(std::move(telemetry));
  const DenseMatrix& v = telemetry.matrix;
  if (config.k > v.cols())
    throw ConfigError("k", "k = " + std::to_string(config.k) + " exceeds the number of players " +
                               std::to_string(v.cols()));
  report.days = v.rows();
  report.players = v.cols();
  report.day_axis = telemetry.day_axis;
  report.player_ids = telemetry.player_ids;

  const SolverOptions opts = config.solver_options();
  const bool has_negative =
      std::any_of(v.values().begin(), v.values().end(), [](double x) { return x < 0.0; });
  for (Method m : config.methods) {
    MethodReport entry;
    entry.method = m;
    if (m == Method::nmf && has_negative) {
      entry.skipped = true;
      entry.skip_reason = "data contains negative values";
      report.methods.push_back(std::move(entry));
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    entry.result = run_method(m, v, opts);
    entry.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    entry.legality = legality_report(entry.result.W, report.schedule, report.day_axis);
    entry.assignment = hard_assign(v, entry.result);
    report.methods.push_back(std::move(entry));
  }

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.output_dir + ": " + ec.message());
  const fs::path dir(config.output_dir);
  for (const auto& m : report.methods)
    if (!m.skipped)
      export_basis_vectors(m.result, report.day_axis,
                           (dir / ("basis_" + std::string(to_string(m.method)) + ".csv")).string());
  export_assignment_histogram(report, (dir / "histogram.csv").string());
  export_assignments(report, (dir / "assignments.csv").string());
  {
    const std::string path = (dir / "report.json").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << report_to_json(report).dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path);
  }
  return report;
}

}  // namespace plarch
