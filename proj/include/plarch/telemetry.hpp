#pragma once

// Level-per-day telemetry: ingestion, gap filling, rule checks against the
// level-cap schedule, and nearest-basis-vector assignment.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "plarch/csv.hpp"
#include "plarch/error.hpp"
#include "plarch/factorization.hpp"
#include "plarch/matrix.hpp"

namespace plarch {

// Piecewise-constant level cap over calendar days.
class ExpansionSchedule {
 public:
  struct Breakpoint {
    std::int64_t day;
    double cap;
    friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
  };

  ExpansionSchedule() = default;

  explicit ExpansionSchedule(std::vector<Breakpoint> breakpoints) : breakpoints_(std::move(breakpoints)) {
    if (breakpoints_.empty()) throw ValidationError("expansion schedule has no breakpoints");
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
      if (!(breakpoints_[i].cap >= 1.0))
        throw ValidationError("expansion schedule: level cap below 1 at day " +
                              std::to_string(breakpoints_[i].day));
      if (i > 0 && breakpoints_[i].day <= breakpoints_[i - 1].day)
        throw ValidationError("expansion schedule: days must be strictly increasing");
      if (i > 0 && breakpoints_[i].cap <= breakpoints_[i - 1].cap)
        throw ValidationError("expansion schedule: caps must be strictly increasing");
    }
  }

  // Level cap 60 -> 70 -> 80 on sample day offsets.
  static ExpansionSchedule wow_like() { return ExpansionSchedule({{0, 60}, {440, 70}, {1510, 80}}); }

  const std::vector<Breakpoint>& breakpoints() const noexcept { return breakpoints_; }

  // Cap of the last breakpoint at or before `day`; nullopt before the first one.
  std::optional<double> cap(std::int64_t day) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), day,
                               [](std::int64_t d, const Breakpoint& b) { return d < b.day; });
    if (it == breakpoints_.begin()) return std::nullopt;
    return std::prev(it)->cap;
  }

  double cap_at(std::int64_t day) const {
    if (auto c = cap(day)) return *c;
    throw ValidationError("expansion schedule does not cover day " + std::to_string(day));
  }

  double max_cap() const { return breakpoints_.empty() ? 0.0 : breakpoints_.back().cap; }

  friend bool operator==(const ExpansionSchedule&, const ExpansionSchedule&) = default;

 private:
  std::vector<Breakpoint> breakpoints_;
};

// Data matrix V (days x players) with its axes. Unobserved cells hold 0 until
// interpolate_missing fills them.
struct TelemetryMatrix {
  DenseMatrix matrix;
  std::vector<std::int64_t> day_axis;
  std::vector<std::string> player_ids;
  std::vector<std::uint8_t> observed_mask;  // row-major, same shape as matrix

  std::size_t days() const noexcept { return matrix.rows(); }
  std::size_t players() const noexcept { return matrix.cols(); }
  bool observed(std::size_t day, std::size_t player) const {
    return observed_mask[day * matrix.cols() + player] != 0;
  }
};

// Reads `day_index,level_cap` rows (header required).
inline ExpansionSchedule load_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schedule file " + path);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<ExpansionSchedule::Breakpoint> points;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = csv::trim(line_no == 1 ? csv::strip_bom(line) : std::string_view(line));
    if (view.empty()) continue;
    const auto fields = csv::split(view);
    if (!header) {
      if (fields.size() != 2 || fields[0] != "day_index" || fields[1] != "level_cap")
        throw ParseError(path + ": expected header 'day_index,level_cap'", line_no);
      header = true;
      continue;
    }
    if (fields.size() != 2) throw ParseError(path + ": expected 2 fields", line_no);
    const auto day = csv::parse_int(fields[0]);
    const auto cap = csv::parse_double(fields[1]);
    if (!day || *day < 0) throw ParseError(path + ": bad day_index '" + std::string(fields[0]) + "'", line_no);
    if (!cap) throw ParseError(path + ": bad level_cap '" + std::string(fields[1]) + "'", line_no);
    points.push_back({*day, *cap});
  }
  if (points.empty()) throw EmptyInputError("schedule file " + path + " has no rows");
  return ExpansionSchedule(std::move(points));
}

inline void save_schedule(const ExpansionSchedule& schedule, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "day_index,level_cap\n";
  for (const auto& b : schedule.breakpoints()) out << b.day << ',' << csv::format_double(b.cap) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

namespace detail {

struct TelemetryRow {
  std::string_view player;
  std::int64_t day;
  double level;
};

inline TelemetryRow parse_telemetry_row(std::string_view line, std::size_t line_no,
                                        const std::string& path) {
  const auto fields = csv::split(line);
  if (fields.size() != 3)
    throw ParseError(path + ": expected 3 fields, got " + std::to_string(fields.size()), line_no);
  if (fields[0].empty()) throw ParseError(path + ": empty player_id", line_no);
  const auto day = csv::parse_int(fields[1]);
  if (!day || *day < 0)
    throw ParseError(path + ": bad day_index '" + std::string(fields[1]) + "'", line_no);
  const auto level = csv::parse_double(fields[2]);
  if (!level) throw ParseError(path + ": bad level '" + std::string(fields[2]) + "'", line_no);
  return {fields[0], *day, *level};
}

// Iterates the data rows of a telemetry CSV, checking the header.
template <typename Fn>
std::size_t for_each_telemetry_row(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open telemetry file " + path);
  std::string line;
  std::size_t line_no = 0, rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = csv::trim(line_no == 1 ? csv::strip_bom(line) : std::string_view(line));
    if (view.empty()) continue;
    if (!header) {
      const auto fields = csv::split(view);
      if (fields.size() != 3 || fields[0] != "player_id" || fields[1] != "day_index" ||
          fields[2] != "level")
        throw ParseError(path + ": expected header 'player_id,day_index,level'", line_no);
      header = true;
      continue;
    }
    fn(parse_telemetry_row(view, line_no, path), line_no);
    ++rows;
  }
  if (!header) throw EmptyInputError("telemetry file " + path + " is empty");
  return rows;
}

}  // namespace detail

// Pivots long-form `player_id,day_index,level` rows into a days x players
// matrix over the contiguous day range of the file. Players are ordered by
// first appearance, then id; duplicate (player, day) rows keep the maximum.
// Two streaming passes, so memory is the matrix plus the mask.
inline TelemetryMatrix load_telemetry(const std::string& path, const ExpansionSchedule& schedule) {
  struct PlayerInfo {
    std::string id;
    std::int64_t first_day;
  };
  std::unordered_map<std::string, std::size_t> index;
  std::vector<PlayerInfo> players;
  std::int64_t min_day = INT64_MAX, max_day = INT64_MIN;
  std::vector<std::string> offending;
  std::size_t offending_count = 0;
  std::size_t last = 0;

  const std::size_t rows = detail::for_each_telemetry_row(path, [&](const detail::TelemetryRow& row,
                                                                    std::size_t line_no) {
    const auto cap = schedule.cap(row.day);
    if (!cap || row.level < 1.0 || row.level > *cap) {
      if (offending.size() < 20)
        offending.push_back("line " + std::to_string(line_no) + " (" + std::string(row.player) +
                            ", day " + std::to_string(row.day) + ", level " +
                            csv::format_double(row.level) + ")");
      ++offending_count;
    }
    // Rows are usually grouped by player; skip the hash lookup on repeats.
    if (players.empty() || players[last].id != row.player) {
      std::string key(row.player);
      auto [it, inserted] = index.try_emplace(key, players.size());
      if (inserted) players.push_back({std::move(key), row.day});
      last = it->second;
    }
    players[last].first_day = std::min(players[last].first_day, row.day);
    min_day = std::min(min_day, row.day);
    max_day = std::max(max_day, row.day);
  });
  if (rows == 0) throw EmptyInputError("telemetry file " + path + " has no data rows");
  if (offending_count > 0) {
    std::string msg = path + ": " + std::to_string(offending_count) +
                      " observed level(s) outside [1, cap(day)]:";
    for (const auto& o : offending) msg += "\n  " + o;
    if (offending_count > offending.size()) msg += "\n  ...";
    throw ValidationError(msg);
  }

  std::vector<std::size_t> order(players.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (players[a].first_day != players[b].first_day) return players[a].first_day < players[b].first_day;
    return players[a].id < players[b].id;
  });
  std::vector<std::size_t> column_of(players.size());
  TelemetryMatrix t;
  t.player_ids.reserve(players.size());
  for (std::size_t col = 0; col < order.size(); ++col) {
    column_of[order[col]] = col;
    t.player_ids.push_back(players[order[col]].id);
  }
  const auto d = static_cast<std::size_t>(max_day - min_day + 1);
  const std::size_t n = players.size();
  t.day_axis.resize(d);
  std::iota(t.day_axis.begin(), t.day_axis.end(), min_day);
  t.matrix = DenseMatrix(d, n);
  t.observed_mask.assign(d * n, 0);

  std::size_t last_col = 0;
  detail::for_each_telemetry_row(path, [&](const detail::TelemetryRow& row, std::size_t) {
    if (t.player_ids[last_col] != row.player)
      last_col = column_of[index.find(std::string(row.player))->second];
    const std::size_t col = last_col;
    const auto r = static_cast<std::size_t>(row.day - min_day);
    auto& mask = t.observed_mask[r * n + col];
    double& cell = t.matrix(r, col);
    cell = mask ? std::max(cell, row.level) : row.level;
    mask = 1;
  });
  return t;
}

// Writes the observed cells in long form, players in column order.
inline void save_telemetry(const TelemetryMatrix& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "player_id,day_index,level\n";
  for (std::size_t c = 0; c < t.players(); ++c)
    for (std::size_t r = 0; r < t.days(); ++r)
      if (t.observed(r, c))
        out << t.player_ids[c] << ',' << t.day_axis[r] << ',' << csv::format_double(t.matrix(r, c))
            << '\n';
  if (!out) throw IoError("write failed for " + path);
}

// Fills unobserved cells per player: linear between neighbouring observations,
// held constant before the first and after the last one. Observed cells and
// the mask are untouched, so the operation is idempotent.
inline TelemetryMatrix interpolate_missing(TelemetryMatrix t) {
  const std::size_t d = t.days(), n = t.players();
  std::vector<std::size_t> seen;
  for (std::size_t c = 0; c < n; ++c) {
    seen.clear();
    for (std::size_t r = 0; r < d; ++r)
      if (t.observed(r, c)) seen.push_back(r);
    if (seen.empty())
      throw ValidationError("player '" + t.player_ids[c] + "' has no observations");
    for (std::size_t r = 0; r < seen.front(); ++r) t.matrix(r, c) = t.matrix(seen.front(), c);
    for (std::size_t r = seen.back() + 1; r < d; ++r) t.matrix(r, c) = t.matrix(seen.back(), c);
    for (std::size_t i = 0; i + 1 < seen.size(); ++i) {
      const std::size_t a = seen[i], b = seen[i + 1];
      if (b == a + 1) continue;
      const double va = t.matrix(a, c), vb = t.matrix(b, c);
      const auto da = static_cast<double>(t.day_axis[a]), span = static_cast<double>(t.day_axis[b]) - da;
      for (std::size_t r = a + 1; r < b; ++r) {
        const double frac = (static_cast<double>(t.day_axis[r]) - da) / span;
        t.matrix(r, c) = va + frac * (vb - va);
      }
    }
  }
  return t;
}

// Tolerance used by legality checks.
inline constexpr double kLegalityTolerance = 1e-6;

struct LegalityReport {
  struct Vector {
    std::size_t monotonicity_violations = 0;
    std::size_t range_violations = 0;
    bool is_legal = true;
  };
  std::vector<Vector> per_vector;
  double aggregate_legality = 1.0;  // fraction of legal vectors
};

// Checks each column of W as a level curve: no day-to-day decrease beyond
// the tolerance and every entry within [1, cap(day)].
inline LegalityReport legality_report(const DenseMatrix& w, const ExpansionSchedule& schedule,
                                      const std::vector<std::int64_t>& day_axis) {
  if (w.rows() != day_axis.size())
    throw DimensionError("legality_report: W has " + std::to_string(w.rows()) + " rows, day axis has " +
                         std::to_string(day_axis.size()) + " days");
  std::vector<double> caps(day_axis.size());
  for (std::size_t r = 0; r < day_axis.size(); ++r) caps[r] = schedule.cap_at(day_axis[r]);

  LegalityReport report;
  report.per_vector.resize(w.cols());
  for (std::size_t j = 0; j < w.cols(); ++j) {
    auto& v = report.per_vector[j];
    for (std::size_t r = 0; r < w.rows(); ++r) {
      const double x = w(r, j);
      if (x < 1.0 - kLegalityTolerance || x > caps[r] + kLegalityTolerance) ++v.range_violations;
      if (r > 0 && x < w(r - 1, j) - kLegalityTolerance) ++v.monotonicity_violations;
    }
    v.is_legal = v.monotonicity_violations == 0 && v.range_violations == 0;
  }
  if (!report.per_vector.empty()) {
    const auto legal = std::count_if(report.per_vector.begin(), report.per_vector.end(),
                                     [](const LegalityReport::Vector& v) { return v.is_legal; });
    report.aggregate_legality = static_cast<double>(legal) / static_cast<double>(w.cols());
  }
  return report;
}

struct HardAssignment {
  std::vector<std::size_t> labels;     // per column of V, in [0, k)
  std::vector<std::size_t> histogram;  // per basis vector, sums to n
};

// Assigns each column to one basis vector: kmeans by its unary coefficients,
// cmeans by largest membership, every other method by the nearest column of W
// (shifted by the centering vector when present). Ties go to the lowest index.
inline HardAssignment hard_assign(const DenseMatrix& v, const FactorizationResult& result) {
  const std::size_t k = result.W.cols(), n = v.cols();
  if (result.W.rows() != v.rows() || result.H.cols() != n || result.H.rows() != k)
    throw DimensionError("hard_assign: result shapes do not conform to V");
  HardAssignment out;
  out.labels.assign(n, 0);
  out.histogram.assign(k, 0);
  if (result.method == Method::kmeans || result.method == Method::cmeans) {
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < k; ++j)
        if (result.H(j, c) > result.H(best, c)) best = j;
      out.labels[c] = best;
    }
  } else {
    DenseMatrix basis = result.W;
    if (result.centering) {
      if (result.centering->size() != v.rows()) throw DimensionError("hard_assign: centering length");
      for (std::size_t r = 0; r < basis.rows(); ++r)
        for (std::size_t j = 0; j < k; ++j) basis(r, j) += (*result.centering)[r];
    }
    const DenseMatrix dist = detail::column_distances(v, basis);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t c = 0; c < n; ++c)
        if (dist(j, c) < best[c]) {
          best[c] = dist(j, c);
          out.labels[c] = j;
        }
  }
  for (std::size_t l : out.labels) ++out.histogram[l];
  return out;
}

}  // namespace plarch
