#pragma once

// Synthetic player populations with planted archetypal level curves. Every
// non-planted player is a shrunken convex mixture of the planted curves, so
// the planted curves are exactly the vertices of the population's hull.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "plarch/csv.hpp"
#include "plarch/error.hpp"
#include "plarch/matrix.hpp"
#include "plarch/telemetry.hpp"

namespace plarch {

// From `start_day` on, the level rises by `rate` per day until `target_level`.
struct LevelingPhase {
  std::int64_t start_day = 0;
  double rate = 1.0;
  double target_level = 1.0;
  friend bool operator==(const LevelingPhase&, const LevelingPhase&) = default;
};

using LevelCurve = std::vector<LevelingPhase>;

struct SyntheticSpec {
  std::size_t n_players = 2000;
  std::size_t days = 200;
  ExpansionSchedule schedule;
  std::vector<LevelCurve> archetype_curves;
  double mixture_shrink = 0.9;
  double missing_fraction = 0.03;
  RandomSeed seed{};

  std::size_t k() const noexcept { return archetype_curves.size(); }
};

struct SyntheticPopulation {
  TelemetryMatrix telemetry;
  std::vector<std::size_t> planted_indices;  // column of planted curve j
};

// Daily levels of a curve, starting from level 1 before the first phase.
// Levels never decrease: a phase whose target is below the current level holds it.
inline std::vector<double> render_curve(const LevelCurve& curve, std::size_t days) {
  std::vector<double> out(days);
  double level = 1.0;
  std::size_t phase = 0;
  bool active = false;
  for (std::size_t t = 0; t < days; ++t) {
    while (phase < curve.size() && curve[phase].start_day <= static_cast<std::int64_t>(t)) {
      ++phase;
      active = true;
    }
    if (active) {
      const auto& p = curve[phase - 1];
      level = std::max(level, std::min(level + p.rate, p.target_level));
    }
    out[t] = level;
  }
  return out;
}

inline void validate(const SyntheticSpec& spec) {
  if (spec.archetype_curves.empty()) throw ValidationError("synthetic spec: no archetype curves");
  if (spec.days == 0) throw ValidationError("synthetic spec: days must be positive");
  if (spec.n_players < spec.k())
    throw ValidationError("synthetic spec: n_players is smaller than the number of curves");
  if (!(spec.mixture_shrink > 0.0 && spec.mixture_shrink < 1.0))
    throw ValidationError("synthetic spec: mixture_shrink must lie in (0, 1)");
  if (!(spec.missing_fraction >= 0.0 && spec.missing_fraction < 1.0))
    throw ValidationError("synthetic spec: missing_fraction must lie in [0, 1)");
  if (spec.schedule.breakpoints().empty() || spec.schedule.breakpoints().front().day > 0)
    throw ValidationError("synthetic spec: schedule must cover day 0");
  for (std::size_t j = 0; j < spec.archetype_curves.size(); ++j) {
    const auto& curve = spec.archetype_curves[j];
    const std::string name = "curve " + std::to_string(j);
    if (curve.empty()) throw ValidationError(name + " has no phases");
    for (std::size_t p = 0; p < curve.size(); ++p) {
      if (curve[p].start_day < 0 || curve[p].start_day >= static_cast<std::int64_t>(spec.days))
        throw ValidationError(name + ": phase start outside the day range");
      if (p > 0 && curve[p].start_day <= curve[p - 1].start_day)
        throw ValidationError(name + ": phase start days must be strictly increasing");
      if (!(curve[p].rate > 0.0)) throw ValidationError(name + ": leveling rate must be positive");
      if (!(curve[p].target_level >= 1.0)) throw ValidationError(name + ": target level below 1");
    }
    const auto levels = render_curve(curve, spec.days);
    for (std::size_t t = 0; t < spec.days; ++t) {
      const double cap = spec.schedule.cap_at(static_cast<std::int64_t>(t));
      if (levels[t] > cap)
        throw ValidationError(name + " reaches level " + csv::format_double(levels[t]) + " on day " +
                              std::to_string(t) + " where the cap is " + csv::format_double(cap));
    }
  }
}

// Builds the population. Planted columns hold the curves verbatim; every other
// column is shrink * (Dirichlet(1) mixture of the curves) + (1 - shrink) *
// (mean of the curves). Afterwards each cell except day 0 is hidden with
// probability missing_fraction (day 0 marks first appearance and stays).
inline SyntheticPopulation generate_population(const SyntheticSpec& spec) {
  validate(spec);
  const std::size_t d = spec.days, n = spec.n_players, k = spec.k();
  Rng rng(spec.seed);

  std::vector<std::vector<double>> curves;
  curves.reserve(k);
  for (const auto& c : spec.archetype_curves) curves.push_back(render_curve(c, d));
  std::vector<double> mean(d, 0.0);
  for (const auto& c : curves)
    for (std::size_t t = 0; t < d; ++t) mean[t] += c[t] / static_cast<double>(k);

  // Planted positions: first k entries of a partial Fisher-Yates shuffle.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(perm[i], perm[i + rng.below(n - i)]);
  std::vector<std::size_t> planted(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::int64_t> curve_of(n, -1);
  for (std::size_t j = 0; j < k; ++j) curve_of[planted[j]] = static_cast<std::int64_t>(j);

  SyntheticPopulation pop;
  auto& t = pop.telemetry;
  t.matrix = DenseMatrix(d, n);
  t.day_axis.resize(d);
  for (std::size_t r = 0; r < d; ++r) t.day_axis[r] = static_cast<std::int64_t>(r);
  const std::size_t width = std::to_string(n - 1).size();
  t.player_ids.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::string id = std::to_string(c);
    t.player_ids.push_back("p" + std::string(width - id.size(), '0') + id);
  }

  std::vector<double> weights(k), column(d);
  for (std::size_t c = 0; c < n; ++c) {
    if (curve_of[c] >= 0) {
      column = curves[static_cast<std::size_t>(curve_of[c])];
    } else {
      double total = 0.0;
      for (double& w : weights) {
        w = -std::log1p(-rng.uniform());
        total += w;
      }
      if (!(total > 0.0)) {
        std::fill(weights.begin(), weights.end(), 1.0);
        total = static_cast<double>(k);
      }
      for (std::size_t r = 0; r < d; ++r) {
        double mix = 0.0;
        for (std::size_t j = 0; j < k; ++j) mix += weights[j] / total * curves[j][r];
        column[r] = spec.mixture_shrink * mix + (1.0 - spec.mixture_shrink) * mean[r];
      }
    }
    for (std::size_t r = 0; r < d; ++r) t.matrix(r, c) = column[r];
  }

  t.observed_mask.assign(d * n, 1);
  if (spec.missing_fraction > 0.0) {
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t r = 1; r < d; ++r)
        if (rng.uniform() < spec.missing_fraction) {
          t.observed_mask[r * n + c] = 0;
          t.matrix(r, c) = 0.0;
        }
  }
  pop.planted_indices = std::move(planted);
  return pop;
}

namespace detail {

inline std::vector<std::string_view> split_list(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (auto f : csv::split(s, sep))
    if (!f.empty()) out.push_back(f);
  return out;
}

}  // namespace detail

// Parses the key = value configuration:
//
//   n_players = 2000
//   days = 200
//   mixture_shrink = 0.9
//   missing_fraction = 0.03
//   seed = 0
//   schedule = 0:60, 70:70, 140:80          # day:cap pairs
//   curve = 0:3:60, 70:5:70, 140:5:80       # one line per archetype, start:rate:target
//
// '#' starts a comment.
inline SyntheticSpec parse_synthetic_spec(std::string_view text) {
  SyntheticSpec spec;
  bool have_players = false, have_days = false, have_schedule = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? end : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = csv::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    const auto key = csv::trim(line.substr(0, eq));
    const auto value = csv::trim(line.substr(eq + 1));
    auto bad = [&](const char* what) {
      return ParseError("bad " + std::string(key) + " (" + what + "): '" + std::string(value) + "'", line_no);
    };
    if (key == "n_players" || key == "days") {
      const auto v = csv::parse_int(value);
      if (!v || *v <= 0) throw bad("positive integer expected");
      (key == "days" ? spec.days : spec.n_players) = static_cast<std::size_t>(*v);
      (key == "days" ? have_days : have_players) = true;
    } else if (key == "mixture_shrink" || key == "missing_fraction") {
      const auto v = csv::parse_double(value);
      if (!v) throw bad("number expected");
      (key == "mixture_shrink" ? spec.mixture_shrink : spec.missing_fraction) = *v;
    } else if (key == "seed") {
      const auto v = csv::parse_int(value);
      if (!v || *v < 0) throw bad("non-negative integer expected");
      spec.seed = RandomSeed{static_cast<std::uint64_t>(*v)};
    } else if (key == "schedule") {
      std::vector<ExpansionSchedule::Breakpoint> points;
      for (auto item : detail::split_list(value, ',')) {
        const auto parts = csv::split(item, ':');
        if (parts.size() != 2) throw bad("day:cap pairs expected");
        const auto day = csv::parse_int(parts[0]);
        const auto cap = csv::parse_double(parts[1]);
        if (!day || !cap) throw bad("day:cap pairs expected");
        points.push_back({*day, *cap});
      }
      try {
        spec.schedule = ExpansionSchedule(std::move(points));
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), line_no);
      }
      have_schedule = true;
    } else if (key == "curve") {
      LevelCurve curve;
      for (auto item : detail::split_list(value, ',')) {
        const auto parts = csv::split(item, ':');
        if (parts.size() != 3) throw bad("start:rate:target triples expected");
        const auto start = csv::parse_int(parts[0]);
        const auto rate = csv::parse_double(parts[1]);
        const auto target = csv::parse_double(parts[2]);
        if (!start || !rate || !target) throw bad("start:rate:target triples expected");
        curve.push_back({*start, *rate, *target});
      }
      if (curve.empty()) throw bad("at least one phase expected");
      spec.archetype_curves.push_back(std::move(curve));
    } else {
      throw ParseError("unknown key '" + std::string(key) + "'", line_no);
    }
  }
  if (!have_players) throw ParseError("missing key 'n_players'", 0);
  if (!have_days) throw ParseError("missing key 'days'", 0);
  if (!have_schedule) throw ParseError("missing key 'schedule'", 0);
  if (spec.archetype_curves.empty()) throw ParseError("missing key 'curve'", 0);
  return spec;
}

inline SyntheticSpec load_synthetic_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open synthetic spec " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_synthetic_spec(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

inline std::string format_synthetic_spec(const SyntheticSpec& spec) {
  std::ostringstream out;
  out << "n_players = " << spec.n_players << '\n'
      << "days = " << spec.days << '\n'
      << "mixture_shrink = " << csv::format_double(spec.mixture_shrink) << '\n'
      << "missing_fraction = " << csv::format_double(spec.missing_fraction) << '\n'
      << "seed = " << spec.seed.value << '\n'
      << "schedule = ";
  const auto& bps = spec.schedule.breakpoints();
  for (std::size_t i = 0; i < bps.size(); ++i)
    out << (i ? ", " : "") << bps[i].day << ':' << csv::format_double(bps[i].cap);
  out << '\n';
  for (const auto& curve : spec.archetype_curves) {
    out << "curve = ";
    for (std::size_t i = 0; i < curve.size(); ++i)
      out << (i ? ", " : "") << curve[i].start_day << ':' << csv::format_double(curve[i].rate) << ':'
          << csv::format_double(curve[i].target_level);
    out << '\n';
  }
  return out.str();
}

// Desk-scale default: 200 days, 2000 players, eight planted behaviours under a
// 60 -> 70 -> 80 cap schedule.
inline SyntheticSpec default_synthetic_spec() {
  SyntheticSpec spec;
  spec.n_players = 2000;
  spec.days = 200;
  spec.schedule = ExpansionSchedule({{0, 60}, {70, 70}, {140, 80}});
  spec.archetype_curves = {
      {{0, 0.1, 20}},                             // casual, slow climb
      {{0, 3, 60}, {70, 5, 70}, {140, 5, 80}},    // hardcore, tracks every cap
      {{100, 2, 60}, {140, 1, 75}},               // late joiner
      {{0, 0.6, 60}, {70, 0.3, 70}},              // steady, stalls after the first raise
      {{0, 1.5, 40}},                             // quits at 40
      {{0, 0.8, 30}, {150, 2, 80}},               // returns for the last expansion
      {{0, 0.35, 70}},                            // slow and steady
      {{0, 1, 60}, {70, 10, 70}, {140, 10, 80}},  // levels instantly on release
  };
  spec.mixture_shrink = 0.9;
  spec.missing_fraction = 0.03;
  spec.seed = RandomSeed{0};
  return spec;
}

}  // namespace plarch
