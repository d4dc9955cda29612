// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset. Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "plarch/plarch.hpp"

using namespace plarch;
namespace fs = std::filesystem;

namespace {

const std::string kData = PLARCH_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure and keeps going.
class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && pass_) {
      pass_ = false;
      failure_ = what;
    }
  }
  Outcome done(const std::string& summary) const { return {pass_, pass_ ? summary : failure_}; }

 private:
  bool pass_ = true;
  std::string failure_;
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

SolverOptions opts_k(std::size_t k, std::uint64_t seed = 0) {
  SolverOptions o;
  o.k = k;
  o.seed = RandomSeed{seed};
  return o;
}

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(RandomSeed{seed});
  DenseMatrix m(rows, cols);
  for (double& x : m.values()) x = rng.uniform();
  return m;
}

oracle::Points to_points(const DenseMatrix& v) {
  oracle::Points p;
  for (std::size_t c = 0; c < v.cols(); ++c) p.push_back(v.column(c));
  return p;
}

bool has_column(const DenseMatrix& v, const std::vector<double>& col) {
  for (std::size_t c = 0; c < v.cols(); ++c)
    if (v.column(c) == col) return true;
  return false;
}

// Unit-square corners at columns 0..3 followed by 50 strictly interior points.
DenseMatrix square_with_interior(std::uint64_t seed) {
  Rng rng(RandomSeed{seed});
  std::vector<std::vector<double>> cols = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (int i = 0; i < 50; ++i) cols.push_back({0.02 + 0.96 * rng.uniform(), 0.02 + 0.96 * rng.uniform()});
  return DenseMatrix::from_columns(cols);
}

DenseMatrix plane_points(std::uint64_t seed, std::size_t n) {
  Rng rng(RandomSeed{seed});
  std::vector<std::vector<double>> cols;
  for (std::size_t i = 0; i < n; ++i) cols.push_back({3.0 * rng.uniform(), rng.uniform() + rng.uniform()});
  return DenseMatrix::from_columns(cols);
}

// Default synthetic population after interpolation, shared by criteria 4-6.
struct SyntheticRun {
  DenseMatrix v;
  std::vector<std::int64_t> days;
  ExpansionSchedule schedule;
  std::vector<std::size_t> planted;
};

const SyntheticRun& synthetic_run() {
  static const SyntheticRun run = [] {
    const auto spec = load_synthetic_spec(kData + "/default_synthetic.cfg");
    auto pop = generate_population(spec);
    auto t = interpolate_missing(std::move(pop.telemetry));
    return SyntheticRun{std::move(t.matrix), std::move(t.day_axis), spec.schedule, pop.planted_indices};
  }();
  return run;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("plarch_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::map<std::string, std::string> directory_contents(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    files[e.path().filename().string()] = {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  return files;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PLARCH_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double exhaustive_tetra_max(const oracle::Points& p) {
  double best = 0.0;
  const std::size_t n = p.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c)
        for (std::size_t d = c + 1; d < n; ++d) best = std::max(best, oracle::tetra_volume(p[a], p[b], p[c], p[d]));
  return best;
}

// ---------------------------------------------------------------- criteria

Outcome archetype_authenticity() {
  Check check;
  std::size_t datasets = 0;
  auto verify = [&](const DenseMatrix& v, std::size_t k, const std::string& name) {
    const auto r = archetypal_analysis(v, opts_k(k));
    for (std::size_t j = 0; j < k; ++j)
      check.require(r.W.column(j) == v.column(r.source_columns[j]) && has_column(v, r.W.column(j)),
                    name + ": archetype " + std::to_string(j) + " is not a data column");
    ++datasets;
  };
  for (std::uint64_t s = 0; s < 10; ++s)
    for (std::size_t k : {2u, 4u, 8u}) verify(random_matrix(6, 120, 100 + s), k, "random " + std::to_string(s));
  for (std::uint64_t s = 0; s < 5; ++s) verify(plane_points(s, 200), 4, "plane " + std::to_string(s));
  verify(square_with_interior(0), 4, "square");
  for (std::size_t k = 2; k <= 8; ++k) verify(synthetic_run().v, k, "synthetic");
  return check.done(std::to_string(datasets) + " runs, every archetype bit-identical to a data column");
}

Outcome hull_extremality() {
  Check check;
  std::size_t off_data_total = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto v = plane_points(s, 200);
    const auto pts = to_points(v);
    const auto hull = oracle::gift_wrap(pts);
    const auto sel = sivm_select(v, 4, RandomSeed{s});
    for (auto c : sel.indices)
      check.require(oracle::on_hull(pts, hull, pts[c]),
                    "dataset " + std::to_string(s) + ": column " + std::to_string(c) + " is inside the hull");
    const auto km = kmeans(v, opts_k(4, s));
    std::size_t off_data = 0;
    for (std::size_t j = 0; j < 4; ++j) off_data += !has_column(v, km.W.column(j));
    check.require(off_data >= 1, "dataset " + std::to_string(s) + ": every k-means centroid is a data point");
    off_data_total += off_data;
  }
  return check.done("5 datasets: all 20 archetypes on the hull; " + std::to_string(off_data_total) +
                    " of 20 k-means centroids are not data points");
}

Outcome brute_force_volume() {
  Check check;
  // Planted corners: exact optimum.
  {
    const auto v = square_with_interior(0);
    const auto sel = sivm_select(v, 4, RandomSeed{0});
    check.require(std::set<std::size_t>(sel.indices.begin(), sel.indices.end()) == std::set<std::size_t>{0, 1, 2, 3},
                  "unit square: selection is not the four corners");
  }
  double worst_planted = 1.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(RandomSeed{600 + s});
    oracle::Points pts;
    for (int j = 0; j < 4; ++j) pts.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    const oracle::Points extremes = pts;
    while (pts.size() < 40) {
      std::array<double, 4> w{};
      double total = 0.0;
      for (double& x : w) total += x = -std::log1p(-rng.uniform());
      oracle::Vec p(3, 0.0);
      for (int j = 0; j < 4; ++j)
        for (int t = 0; t < 3; ++t) p[t] += w[j] / total * extremes[j][t];
      pts.push_back(p);
    }
    const auto sel = sivm_select(DenseMatrix::from_columns(pts), 4, RandomSeed{s});
    const auto& i = sel.indices;
    const double ratio = oracle::tetra_volume(pts[i[0]], pts[i[1]], pts[i[2]], pts[i[3]]) / exhaustive_tetra_max(pts);
    worst_planted = std::min(worst_planted, ratio);
    check.require(std::abs(ratio - 1.0) < 1e-12, "planted tetrahedron " + std::to_string(s) + ": ratio " + fmt(ratio));
  }
  // Unstructured point clouds.
  double worst = 1.0;
  std::size_t below = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const std::size_t n = 30 + 3 * s;
    const auto v = random_matrix(3, n, 500 + s);
    const auto pts = to_points(v);
    const auto sel = sivm_select(v, 4, RandomSeed{s});
    const auto& i = sel.indices;
    const double ratio = oracle::tetra_volume(pts[i[0]], pts[i[1]], pts[i[2]], pts[i[3]]) / exhaustive_tetra_max(pts);
    worst = std::min(worst, ratio);
    below += ratio < 0.95;
  }
  check.require(below == 0, "uniform-cube clouds: greedy/exhaustive volume ratio below 0.95 on " +
                                std::to_string(below) + " of 10 (worst " + fmt(worst, 3) +
                                "); planted sets exact");
  return check.done("planted sets exact; uniform-cube worst ratio " + fmt(worst, 3));
}

Outcome planted_recovery() {
  Check check;
  const auto& run = synthetic_run();
  const auto r = archetypal_analysis(run.v, opts_k(8));
  const std::set<std::size_t> got(r.source_columns.begin(), r.source_columns.end());
  const std::set<std::size_t> want(run.planted.begin(), run.planted.end());
  check.require(got == want, "archetype set differs from the planted columns");
  return check.done("200 days x 2000 players: all 8 planted columns recovered");
}

Outcome legality_contrast() {
  Check check;
  const auto& run = synthetic_run();
  std::string values;
  for (Method m : kAllMethods) {
    const auto r = run_method(m, run.v, opts_k(8));
    const auto rep = legality_report(r.W, run.schedule, run.days);
    std::size_t range = 0;
    for (const auto& pv : rep.per_vector) range += pv.range_violations;
    if (m == Method::archetypal) check.require(rep.aggregate_legality == 1.0, "archetypal legality below 1");
    if (m == Method::kmeans || m == Method::cmeans)
      check.require(range == 0, std::string(to_string(m)) + " has " + std::to_string(range) + " range violations");
    values += std::string(values.empty() ? "" : ", ") + std::string(to_string(m)) + " " + fmt(rep.aggregate_legality, 3);
  }
  return check.done("aggregate legality: " + values);
}

Outcome monotone_in_k() {
  Check check;
  const auto& run = synthetic_run();
  double previous = std::numeric_limits<double>::infinity();
  std::string errors;
  for (std::size_t k = 2; k <= 8; ++k) {
    const double e = archetypal_analysis(run.v, opts_k(k)).reconstruction_error;
    check.require(e <= previous + 1e-9, "error rises from k=" + std::to_string(k - 1) + " to k=" + std::to_string(k));
    previous = e;
    errors += (errors.empty() ? "" : " ") + fmt(e, 5);
  }
  return check.done("errors k=2..8: " + errors);
}

Outcome pca_optimality() {
  Check check;
  double margin = std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto v = random_matrix(8, 40, 300 + s);
    const double best = pca(v, opts_k(4, s)).reconstruction_error;
    for (Method m : kAllMethods) {
      const double e = run_method(m, v, opts_k(4, s)).reconstruction_error;
      check.require(best <= e + 1e-9, "dataset " + std::to_string(s) + ": " + std::string(to_string(m)) + " beats PCA");
      if (m != Method::pca) margin = std::min(margin, e - best);
    }
  }
  return check.done("10 datasets, smallest gap to another method " + fmt(margin, 3));
}

Outcome solver_oracles() {
  Check check;
  // k-means vs exhaustive partitions on planted 2-D clusters of 8 to 10 points.
  for (std::uint64_t s = 0; s < 6; ++s) {
    const std::size_t n = 8 + s % 3;
    Rng rng(RandomSeed{40 + s});
    const std::array<std::array<double, 2>, 3> centers = {{{0, 0}, {6, 1}, {2, 7}}};
    std::vector<std::vector<double>> cols;
    for (std::size_t i = 0; i < n; ++i)
      cols.push_back({centers[i % 3][0] + 2.0 * rng.uniform() - 1.0, centers[i % 3][1] + 2.0 * rng.uniform() - 1.0});
    const double best = oracle::exhaustive_kmeans_optimum(cols, 3);
    const double got = kmeans(DenseMatrix::from_columns(cols), opts_k(3, s)).objective_trace.back();
    check.require(std::abs(got - best) <= 1e-9 * std::max(1.0, best),
                  "k-means misses the partition optimum at n=" + std::to_string(n));
  }
  // c-means vs the textbook fixed point.
  {
    const auto v = DenseMatrix::from_columns({{0, 0}, {1, 0.5}, {0.3, 1}, {5, 5}, {6, 4.5}, {5.5, 6}});
    SolverOptions o = opts_k(2, 3);
    o.tolerance = 1e-15;
    o.max_iterations = 10000;
    const auto r = cmeans(v, o);
    Rng rng(o.seed);
    const auto init = detail::farthest_first_indices(v, 2, rng);
    const auto pts = to_points(v);
    const auto u = oracle::fuzzy_cmeans_fixed_point(pts, {pts[init[0]], pts[init[1]]}, 2.0);
    double diff = 0.0;
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 2; ++j) diff = std::max(diff, std::abs(r.H(j, i) - u[i][j]));
    check.require(diff <= 1e-6, "c-means memberships differ from the fixed point by " + fmt(diff));
  }
  // Convex coefficients vs a simplex grid.
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto w = random_matrix(4, 3, 700 + s);
    DenseMatrix v = random_matrix(4, 5, 800 + s);
    for (double& x : v.values()) x = 2.0 * x - 0.5;
    const auto h = solve_convex_coefficients(v, w);
    const std::array<std::vector<double>, 3> ws = {w.column(0), w.column(1), w.column(2)};
    for (std::size_t c = 0; c < 5; ++c) {
      double got = 0.0;
      for (std::size_t i = 0; i < 4; ++i) {
        double r = v(i, c);
        for (std::size_t j = 0; j < 3; ++j) r -= w(i, j) * h(j, c);
        got += r * r;
      }
      check.require(std::abs(got - oracle::simplex_grid_min(v.column(c), ws)) <= 1e-4, "convex solve misses the grid");
    }
  }
  // PCA vs the Jacobi spectrum tail.
  for (std::uint64_t s = 0; s < 5; ++s) {
    DenseMatrix v = random_matrix(6, 10, 17 + s);
    for (double& x : v.values()) x = 2.0 * x - 1.0;
    const auto gram = multiply_transposed_right(v, v);
    std::vector<std::vector<double>> a(6, std::vector<double>(6));
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) a[i][j] = gram(i, j);
    const auto ev = oracle::jacobi_eigenvalues(a);
    const double tail = ev[2] + ev[3] + ev[4] + ev[5];
    const double e = pca(v, opts_k(2)).reconstruction_error;
    check.require(std::abs(e * e - tail) <= 1e-8 * tail, "PCA error differs from the spectrum tail");
  }
  return check.done("k-means, c-means, convex solve and PCA agree with their oracles");
}

Outcome invariant_suites() {
  Check check;
  std::size_t runs = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto v = random_matrix(5, 60, 20 + s);
    const auto nm = nmf(v, opts_k(3, s));
    for (double x : nm.W.values()) check.require(x >= 0.0, "negative NMF factor");
    for (double x : nm.H.values()) check.require(x >= 0.0, "negative NMF coefficient");
    for (std::size_t i = 1; i < nm.objective_trace.size(); ++i)
      check.require(nm.objective_trace[i] <= nm.objective_trace[i - 1] + 1e-9, "NMF objective increased");

    const auto km = kmeans(v, opts_k(4, s));
    for (std::size_t i = 1; i < km.objective_trace.size(); ++i)
      check.require(km.objective_trace[i] <= km.objective_trace[i - 1] * (1 + 1e-12), "k-means objective increased");
    for (std::size_t j = 0; j < 4; ++j) {
      std::vector<double> mean(5, 0.0);
      double count = 0.0;
      for (std::size_t c = 0; c < 60; ++c)
        if (km.H(j, c) == 1.0) {
          for (std::size_t i = 0; i < 5; ++i) mean[i] += v(i, c);
          ++count;
        }
      for (std::size_t i = 0; i < 5; ++i)
        check.require(std::abs(km.W(i, j) - mean[i] / count) <= 1e-10, "centroid is not its cluster mean");
    }

    const auto cm = cmeans(v, opts_k(3, s));
    for (std::size_t c = 0; c < 60; ++c) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        check.require(cm.H(j, c) >= 0.0 && cm.H(j, c) <= 1.0, "membership outside [0, 1]");
        sum += cm.H(j, c);
      }
      check.require(std::abs(sum - 1.0) <= 1e-9, "memberships do not sum to 1");
    }
    runs += 3;
  }
  Rng rng(RandomSeed{77});
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 2 + rng.below(4), d = m - 1 + rng.below(3);
    std::vector<std::vector<double>> pts(m, std::vector<double>(d));
    for (auto& p : pts)
      for (double& x : p) x = rng.uniform();
    const double base = cayley_menger_volume(pts);
    auto moved = pts;
    std::vector<double> shift(d);
    for (double& x : shift) x = 10.0 * rng.uniform() - 5.0;
    for (auto& p : moved)
      for (std::size_t i = 0; i < d; ++i) p[i] += shift[i];
    std::reverse(moved.begin(), moved.end());
    check.require(std::abs(cayley_menger_volume(moved) - base) <= 1e-9 * std::max(1.0, base),
                  "volume not invariant under translation and permutation");
    auto flat = pts;
    flat.push_back(pts.front());
    for (std::size_t i = 0; i < d; ++i) flat.back()[i] = 0.5 * (pts[0][i] + pts[1][i]);
    check.require(cayley_menger_volume(flat) == 0.0, "affinely dependent points give a non-zero volume");
    std::vector<double> y(m);
    for (double& x : y) x = 4.0 * rng.uniform() - 2.0;
    const auto once = project_to_simplex(y);
    check.require(project_to_simplex(once) == once, "simplex projection is not idempotent");
  }
  return check.done(std::to_string(runs) + " factorizations and 300 geometry trials hold every invariant");
}

Outcome cli_determinism() {
  Check check;
  const auto dir = scratch("determinism");
  const std::string schedule = kData + "/wow_schedule.csv";
  const std::vector<std::string> runs = {
      "compare --synthetic " + kData + "/default_synthetic.cfg --out ",
      "compare --synthetic " + kData + "/default_synthetic.cfg --k 5 --seed 11 --methods archetypal,kmeans --out ",
      "compare --input " + kData + "/separated_pairs.csv --schedule " + schedule + " --k 2 --out ",
      "generate --seed 4 --out ",
  };
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto a = dir / (std::to_string(i) + "a"), b = dir / (std::to_string(i) + "b");
    check.require(run_cli(runs[i] + a.string()) == 0 && run_cli(runs[i] + b.string()) == 0,
                  "run failed: " + runs[i]);
    check.require(!directory_contents(a).empty() && directory_contents(a) == directory_contents(b),
                  "outputs differ: " + runs[i]);
  }
  fs::remove_all(dir);
  return check.done(std::to_string(runs.size()) + " CLI configurations reproduce byte-identical output directories");
}

// Full-scale population: 2555 days, 70,014 players, 60/70/80 caps.
SyntheticSpec stress_spec() {
  SyntheticSpec spec;
  spec.n_players = 70014;
  spec.days = 2555;
  spec.schedule = ExpansionSchedule({{0, 60}, {440, 70}, {1510, 80}});
  spec.archetype_curves = {
      {{0, 0.02, 20}},
      {{0, 0.5, 60}, {440, 0.5, 70}, {1510, 0.5, 80}},
      {{900, 0.2, 60}, {1510, 0.1, 75}},
      {{0, 0.1, 60}, {440, 0.05, 70}},
      {{0, 0.3, 40}},
      {{0, 0.15, 30}, {1600, 0.5, 80}},
      {{0, 0.04, 70}},
      {{0, 0.2, 60}, {440, 5, 70}, {1510, 5, 80}},
  };
  spec.seed = RandomSeed{0};
  return spec;
}

Outcome scale_stress() {
  Check check;
  const auto dir = scratch("stress");
  const auto spec = stress_spec();
  const auto csv_path = (dir / "telemetry.csv").string();
  {
    const auto pop = generate_population(spec);
    save_telemetry(pop.telemetry, csv_path);
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto t = load_telemetry(csv_path, spec.schedule);
  fs::remove_all(dir);
  check.require(t.days() == 2555 && t.players() == 70014, "loaded shape is wrong");
  t = interpolate_missing(std::move(t));
  const auto t1 = std::chrono::steady_clock::now();
  const auto sel = sivm_select(t.matrix, 8, RandomSeed{0});
  const auto t2 = std::chrono::steady_clock::now();
  check.require(sivm_select(t.matrix, 8, RandomSeed{0}).indices == sel.indices, "selection is not deterministic");
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k <= 8; ++k) {
    const auto r = archetypal_analysis(t.matrix, opts_k(k));
    for (std::size_t j = 0; j < k; ++j)
      check.require(r.W.column(j) == t.matrix.column(r.source_columns[j]), "archetype is not a data column");
    check.require(r.reconstruction_error <= previous + 1e-9, "error rises at k=" + std::to_string(k));
    previous = r.reconstruction_error;
  }
  const auto t3 = std::chrono::steady_clock::now();
  auto secs = [](auto a, auto b) { return fmt(std::chrono::duration<double>(b - a).count(), 3) + " s"; };
  return check.done("2555 x 70014: ingest + interpolate " + secs(t0, t1) + ", SIVM k=8 " + secs(t1, t2) +
                    ", archetypal k=2..8 " + secs(t2, t3));
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "archetype authenticity", archetype_authenticity},
      {2, "hull extremality", hull_extremality},
      {3, "brute-force SIVM volume", brute_force_volume},
      {4, "planted-archetype recovery", planted_recovery},
      {5, "legality contrast", legality_contrast},
      {6, "monotone-in-k error", monotone_in_k},
      {7, "PCA optimality ordering", pca_optimality},
      {8, "solver oracles", solver_oracles},
      {9, "numerical invariant suites", invariant_suites},
      {10, "CLI determinism", cli_determinism},
      {11, "scale stress", scale_stress},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d %s (%.1f s): %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs, out.detail.c_str());
    std::fflush(stdout);
    failures += !out.pass;
  }
  return failures == 0 ? 0 : 1;
}
