// plarch: compare player-clustering factorizations on level-per-day telemetry.
//
//   plarch compare  --synthetic spec.cfg --out runs/a
//   plarch compare  --input levels.csv --schedule caps.csv --k 8 --seed 0 --out runs/b
//   plarch generate --spec spec.cfg --out data/synth
//   plarch validate --input levels.csv --schedule caps.csv
//
// Exit codes: 0 success, 2 configuration error, 3 ingestion error,
// 4 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plarch/plarch.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIngestion = 3;
constexpr int kExitNumerical = 4;

std::vector<plarch::Method> parse_methods(const std::string& list) {
  std::vector<plarch::Method> out;
  for (auto item : plarch::csv::split(list)) {
    if (item.empty()) continue;
    if (item == "all") return {plarch::kAllMethods.begin(), plarch::kAllMethods.end()};
    const auto m = plarch::method_from_string(item);
    if (!m) throw plarch::ConfigError("methods", "unknown method '" + std::string(item) + "'");
    out.push_back(*m);
  }
  return out;
}

void print_summary(const plarch::ComparisonReport& report) {
  std::printf("dataset: %zu days x %zu players, k = %zu, seed = %llu\n", report.days, report.players,
              report.k, static_cast<unsigned long long>(report.seed));
  std::printf("%-11s %22s %6s %5s %9s %10s\n", "method", "reconstruction_error", "iters", "conv",
              "legality", "time_ms");
  for (const auto& m : report.methods) {
    const std::string name(plarch::to_string(m.method));
    if (m.skipped) {
      std::printf("%-11s skipped: %s\n", name.c_str(), m.skip_reason.c_str());
      continue;
    }
    std::printf("%-11s %22.10g %6zu %5s %9.3f %10.1f\n", name.c_str(), m.result.reconstruction_error,
                m.result.iterations, m.result.converged ? "yes" : "no", m.legality.aggregate_legality,
                m.wall_time_ms);
  }
}

int cmd_generate(const std::string& spec_path, const std::string& out_dir,
                 const std::optional<std::uint64_t>& seed) {
  plarch::SyntheticSpec spec =
      spec_path.empty() ? plarch::default_synthetic_spec() : plarch::load_synthetic_spec(spec_path);
  if (seed) spec.seed = plarch::RandomSeed{*seed};
  const auto pop = plarch::generate_population(spec);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw plarch::IoError("cannot create " + out_dir + ": " + ec.message());
  const fs::path dir(out_dir);
  plarch::save_telemetry(pop.telemetry, (dir / "telemetry.csv").string());
  plarch::save_schedule(spec.schedule, (dir / "schedule.csv").string());
  {
    std::ofstream out(dir / "planted.csv", std::ios::binary);
    out << "archetype,column,player_id\n";
    for (std::size_t j = 0; j < pop.planted_indices.size(); ++j)
      out << j << ',' << pop.planted_indices[j] << ','
          << pop.telemetry.player_ids[pop.planted_indices[j]] << '\n';
    if (!out) throw plarch::IoError("write failed for planted.csv");
  }
  {
    std::ofstream out(dir / "spec.cfg", std::ios::binary);
    out << plarch::format_synthetic_spec(spec);
    if (!out) throw plarch::IoError("write failed for spec.cfg");
  }
  std::printf("wrote %zu players x %zu days to %s\n", pop.telemetry.players(), pop.telemetry.days(),
              out_dir.c_str());
  return 0;
}

int cmd_validate(const std::string& input, const std::string& schedule_path) {
  const auto schedule = plarch::load_schedule(schedule_path);
  auto t = plarch::load_telemetry(input, schedule);
  std::size_t observed = 0;
  for (auto m : t.observed_mask) observed += m;
  t = plarch::interpolate_missing(std::move(t));
  const auto legality = plarch::legality_report(t.matrix, schedule, t.day_axis);
  std::size_t illegal = 0;
  for (std::size_t c = 0; c < legality.per_vector.size(); ++c)
    if (!legality.per_vector[c].is_legal) {
      if (illegal < 10)
        std::printf("player %s: %zu level decreases, %zu out-of-range days\n", t.player_ids[c].c_str(),
                    legality.per_vector[c].monotonicity_violations,
                    legality.per_vector[c].range_violations);
      ++illegal;
    }
  const std::size_t cells = t.days() * t.players();
  std::printf("%zu players x %zu days, %zu of %zu cells observed (%.2f%% interpolated)\n", t.players(),
              t.days(), observed, cells, 100.0 * static_cast<double>(cells - observed) / static_cast<double>(cells));
  std::printf("%zu players with illegal trajectories\n", illegal);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compare player-clustering factorizations on level-per-day telemetry"};
  app.require_subcommand(1);

  plarch::RunConfig config;
  std::string input, schedule, synthetic, methods = "all";
  std::size_t max_iterations = 0;
  double tolerance = 0.0, fuzzifier = 0.0;
  bool center_pca = false;
  auto* compare = app.add_subcommand("compare", "Run the selected methods and write a report");
  compare->add_option("--input", input, "Telemetry CSV (player_id,day_index,level)");
  compare->add_option("--synthetic", synthetic, "Synthetic population spec");
  compare->add_option("--schedule", schedule, "Level-cap schedule CSV (day_index,level_cap)");
  compare->add_option("--k", config.k, "Number of basis vectors")->capture_default_str();
  compare->add_option("--seed", config.seed, "Random seed")->capture_default_str();
  compare->add_option("--methods", methods, "Comma-separated subset of kmeans,cmeans,nmf,pca,archetypal")
      ->capture_default_str();
  compare->add_option("--out", config.output_dir, "Output directory")->required();
  auto* max_it_opt = compare->add_option("--max-iterations", max_iterations, "Iteration limit");
  auto* tol_opt = compare->add_option("--tolerance", tolerance, "Relative objective change to stop at");
  auto* fuzz_opt = compare->add_option("--fuzzifier", fuzzifier, "c-means fuzzifier m");
  compare->add_flag("--center-pca", center_pca, "Mean-center the data before PCA");

  std::string gen_spec, gen_out;
  std::uint64_t gen_seed = 0;
  auto* generate = app.add_subcommand("generate", "Write a synthetic population as telemetry CSV");
  generate->add_option("--spec", gen_spec, "Synthetic spec (built-in default when omitted)");
  auto* gen_seed_opt = generate->add_option("--seed", gen_seed, "Override the spec seed");
  generate->add_option("--out", gen_out, "Output directory")->required();

  std::string val_input, val_schedule;
  auto* validate = app.add_subcommand("validate", "Load telemetry and check it against the schedule");
  validate->add_option("--input", val_input, "Telemetry CSV")->required();
  validate->add_option("--schedule", val_schedule, "Level-cap schedule CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*compare) {
      if (!input.empty()) config.input_csv = input;
      if (!schedule.empty()) config.schedule_csv = schedule;
      if (!synthetic.empty()) config.synthetic_spec = synthetic;
      config.methods = parse_methods(methods);
      if (*max_it_opt) config.max_iterations = max_iterations;
      if (*tol_opt) config.tolerance = tolerance;
      if (*fuzz_opt) config.fuzzifier_m = fuzzifier;
      if (center_pca) config.center_pca = true;
      print_summary(plarch::run_compare(config));
      return 0;
    }
    if (*generate) {
      return cmd_generate(gen_spec, gen_out,
                          *gen_seed_opt ? std::optional<std::uint64_t>(gen_seed) : std::nullopt);
    }
    if (*validate) return cmd_validate(val_input, val_schedule);
  } catch (const plarch::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const plarch::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitIngestion;
  } catch (const plarch::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitIngestion;
  } catch (const plarch::EmptyInputError& e) {
    std::fprintf(stderr, "empty input: %s\n", e.what());
    return kExitIngestion;
  } catch (const plarch::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitIngestion;
  } catch (const plarch::Error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
