#pragma once

// Archetypal analysis by simplex volume maximization: archetypes are data
// columns picked greedily to span the largest simplex, and every column is
// then approximated by a convex mixture of them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "plarch/factorization.hpp"
#include "plarch/geometry.hpp"

namespace plarch {

struct ArchetypeSelection {
  std::vector<std::size_t> indices;  // distinct columns of V, in selection order
  // Simplex volume after each addition; volumes[0] = 0 (single point),
  // volumes[1] is the edge length.
  std::vector<double> volumes;
};

// Raised when some greedy step has only duplicates of already selected
// columns to choose from. The completed (padded) selection is attached.
class DegenerateSelectionError : public DegeneracyError {
 public:
  DegenerateSelectionError(const std::string& what, ArchetypeSelection selection)
      : DegeneracyError(what), selection_(std::move(selection)) {}
  const ArchetypeSelection& selection() const noexcept { return selection_; }

 private:
  ArchetypeSelection selection_;
};

struct ConvexSolveOptions {
  double tolerance = 1e-8;  // on the projected-gradient norm
  std::size_t max_iterations = 500;
};

namespace detail {

// Selected vertices plus the cached squared distances from each of them to
// every column.
class GreedySimplex {
 public:
  explicit GreedySimplex(const DenseMatrix& v) : v_(v) {}

  void add(std::size_t column) {
    indices_.push_back(column);
    to_all_.push_back(squared_distances_to_columns(v_, v_.column(column)));
  }

  std::size_t size() const noexcept { return indices_.size(); }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  double distance(std::size_t vertex, std::size_t column) const { return to_all_[vertex][column]; }

  // Squared volume of the simplex on the given vertex subset plus `candidate`.
  double squared_volume_with(std::span<const std::size_t> vertices, std::size_t candidate,
                             std::vector<double>& scratch) const {
    const std::size_t m = vertices.size() + 1;
    scratch.assign(m * m, 0.0);
    for (std::size_t a = 0; a < vertices.size(); ++a) {
      for (std::size_t b = a + 1; b < vertices.size(); ++b) {
        const double d = to_all_[vertices[a]][indices_[vertices[b]]];
        scratch[a * m + b] = scratch[b * m + a] = d;
      }
      const double d = to_all_[vertices[a]][candidate];
      scratch[a * m + (m - 1)] = scratch[(m - 1) * m + a] = d;
    }
    return cayley_menger_squared_volume(scratch, m);
  }

 private:
  const DenseMatrix& v_;
  std::vector<std::size_t> indices_;
  std::vector<std::vector<double>> to_all_;
};

inline std::size_t argmax_lowest(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

// All subsets of {0..n-1} with `size` elements, in lexicographic order.
inline std::vector<std::vector<std::size_t>> subsets_of_size(std::size_t n, std::size_t size) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(size);
  std::iota(cur.begin(), cur.end(), std::size_t{0});
  if (size > n) return out;
  while (true) {
    out.push_back(cur);
    std::size_t i = size;
    while (i > 0 && cur[i - 1] == n - size + (i - 1)) --i;
    if (i == 0) break;
    ++cur[i - 1];
    for (std::size_t j = i; j < size; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

// Volume by which the convex hull of the selected columns grows when each
// candidate is added, measured inside the affine span of the selection. Valid
// once the selection spans every candidate (all simplex volumes are zero):
// the score is a sum of max(0, signed facet volume) terms, so it is convex in
// the candidate and zero inside the current hull.
inline std::vector<double> hull_growth(const DenseMatrix& v, const std::vector<std::size_t>& selected,
                                       const std::vector<std::size_t>& candidates) {
  const std::size_t d = v.rows();
  const std::vector<double> origin = v.column(selected.front());
  // Orthonormal basis of the affine span by modified Gram-Schmidt.
  std::vector<std::vector<double>> basis;
  double scale = 0.0;
  for (std::size_t s = 1; s < selected.size(); ++s) {
    std::vector<double> u = v.column(selected[s]);
    for (std::size_t i = 0; i < d; ++i) u[i] -= origin[i];
    double norm0 = 0.0;
    for (double x : u) norm0 += x * x;
    scale = std::max(scale, std::sqrt(norm0));
    for (const auto& e : basis) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += e[i] * u[i];
      for (std::size_t i = 0; i < d; ++i) u[i] -= dot * e[i];
    }
    double norm = 0.0;
    for (double x : u) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 1e-9 * scale) {
      for (double& x : u) x /= norm;
      basis.push_back(std::move(u));
    }
  }
  const std::size_t r = basis.size();
  std::vector<double> scores(candidates.size(), 0.0);
  if (r == 0) return scores;

  auto coords = [&](std::size_t column) {
    std::vector<double> c(r, 0.0);
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t i = 0; i < d; ++i) c[j] += basis[j][i] * (v(i, column) - origin[i]);
    return c;
  };
  std::vector<std::vector<double>> sel_coords;
  for (std::size_t s : selected) sel_coords.push_back(coords(s));
  std::vector<std::vector<double>> cand_coords;
  cand_coords.reserve(candidates.size());
  for (std::size_t q : candidates) cand_coords.push_back(coords(q));

  double factorial = 1.0;
  for (std::size_t i = 2; i <= r; ++i) factorial *= static_cast<double>(i);
  const double tol = 1e-12 * std::pow(scale, static_cast<double>(r));

  // Signed facet volume is linear: normal . x - offset.
  for (const auto& facet : subsets_of_size(selected.size(), r)) {
    const auto& f0 = sel_coords[facet[0]];
    std::vector<double> normal(r);
    for (std::size_t axis = 0; axis < r; ++axis) {
      std::vector<double> m(r * r);
      for (std::size_t a = 1; a < r; ++a)
        for (std::size_t j = 0; j < r; ++j) m[(a - 1) * r + j] = sel_coords[facet[a]][j] - f0[j];
      for (std::size_t j = 0; j < r; ++j) m[(r - 1) * r + j] = j == axis ? 1.0 : 0.0;
      normal[axis] = determinant(std::move(m), r);
    }
    double offset = 0.0;
    for (std::size_t j = 0; j < r; ++j) offset += normal[j] * f0[j];
    auto signed_volume = [&](const std::vector<double>& x) {
      double s = -offset;
      for (std::size_t j = 0; j < r; ++j) s += normal[j] * x[j];
      return s;
    };
    double lo = 0.0, hi = 0.0;
    for (const auto& p : sel_coords) {
      const double s = signed_volume(p);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    if (lo < -tol && hi > tol) continue;  // not a facet of the hull
    if (lo >= -tol && hi <= tol) continue;  // degenerate: selection lies in this hyperplane
    const double sign = hi > tol ? -1.0 : 1.0;  // hull on the non-positive side
    for (std::size_t c = 0; c < candidates.size(); ++c)
      scores[c] += std::max(0.0, sign * signed_volume(cand_coords[c])) / factorial;
  }
  return scores;
}

}  // namespace detail

// Greedy simplex volume maximization. The first vertex is the column farthest
// from the column farthest from a seeded random start; each further vertex
// maximizes the volume of the simplex it forms with those already chosen.
//
// When the data's affine dimension is exhausted (every candidate spans zero
// volume, e.g. a fourth vertex in the plane), the candidate that grows the
// convex hull of the selection the most is taken instead; if every candidate
// is already inside that hull, candidates are ranked by the summed volume of
// the lower-dimensional faces through them, one face dimension at a time.
// Columns identical to a selected vertex are never candidates.
// Ties go to the lowest column index.
inline ArchetypeSelection sivm_select(const DenseMatrix& v, std::size_t k, RandomSeed seed) {
  const std::size_t n = v.cols();
  if (k < 2) throw ConfigError("k", "archetypal analysis needs k >= 2");
  if (k > n)
    throw ConfigError("k", "k = " + std::to_string(k) + " exceeds the number of columns " +
                               std::to_string(n));
  Rng rng(seed);
  const std::size_t start = rng.below(n);
  const std::size_t far = detail::argmax_lowest(squared_distances_to_columns(v, v.column(start)));
  const std::size_t first = detail::argmax_lowest(squared_distances_to_columns(v, v.column(far)));

  detail::GreedySimplex simplex(v);
  simplex.add(first);
  ArchetypeSelection sel;
  sel.indices.push_back(first);
  sel.volumes.push_back(0.0);

  std::vector<char> taken(n, 0);
  taken[first] = 1;
  bool degenerate = false;
  std::vector<double> scratch;

  while (sel.indices.size() < k) {
    const std::size_t have = simplex.size();
    std::vector<std::size_t> candidates;
    for (std::size_t q = 0; q < n; ++q) {
      if (taken[q]) continue;
      bool duplicate = false;
      for (std::size_t a = 0; a < have && !duplicate; ++a) duplicate = simplex.distance(a, q) == 0.0;
      if (!duplicate) candidates.push_back(q);
    }

    std::size_t chosen = n;
    double chosen_volume = 0.0;
    if (candidates.empty()) {
      degenerate = true;
      chosen = static_cast<std::size_t>(std::find(taken.begin(), taken.end(), 0) - taken.begin());
    } else {
      std::vector<std::size_t> all(have);
      std::iota(all.begin(), all.end(), std::size_t{0});
      double best = 0.0;
      for (std::size_t q : candidates) {
        const double sq = simplex.squared_volume_with(all, q, scratch);
        if (sq > best) {
          best = sq;
          chosen = q;
        }
      }
      if (chosen < n) {
        chosen_volume = std::sqrt(best);
      } else {
        // Zero volume everywhere: take the largest growth of the hull.
        const auto growth = detail::hull_growth(v, simplex.indices(), candidates);
        double best_growth = 0.0;
        for (std::size_t c = 0; c < candidates.size(); ++c)
          if (growth[c] > best_growth) {
            best_growth = growth[c];
            chosen = candidates[c];
          }
      }
      if (chosen == n) {
        // Nothing outside the hull: rank by faces through the candidate.
        for (std::size_t face = have - 1; face >= 1 && chosen == n; --face) {
          const auto subsets = detail::subsets_of_size(have, face);
          double best_sum = 0.0;
          for (std::size_t q : candidates) {
            double sum = 0.0;
            for (const auto& s : subsets) sum += std::sqrt(simplex.squared_volume_with(s, q, scratch));
            if (sum > best_sum) {
              best_sum = sum;
              chosen = q;
            }
          }
        }
        if (chosen == n) chosen = candidates.front();
      }
    }
    taken[chosen] = 1;
    simplex.add(chosen);
    sel.indices.push_back(chosen);
    sel.volumes.push_back(chosen_volume);
  }

  if (degenerate)
    throw DegenerateSelectionError(
        "simplex is degenerate: too few distinct columns for " + std::to_string(k) + " vertices",
        std::move(sel));
  return sel;
}

namespace detail {

// Solves the dense n x n system a x = b by Gaussian elimination with partial
// pivoting; nullopt when a pivot is negligible relative to the matrix scale.
inline std::optional<std::vector<double>> solve_linear(std::vector<double> a, std::vector<double> b,
                                                       std::size_t n) {
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return std::nullopt;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (std::abs(a[pivot * n + col]) <= 1e-13 * scale) return std::nullopt;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
    x[i] = s / a[i * n + i];
  }
  return x;
}

// Quadratic model of one column: f(h) = 1/2 h^T G h - b^T h, which differs
// from 1/2 ||v - W h||^2 by a constant.
struct ColumnQuadratic {
  const DenseMatrix& gram;
  std::vector<double> linear;

  double value(const std::vector<double>& h) const {
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      double gh = 0.0;
      for (std::size_t j = 0; j < h.size(); ++j) gh += gram(i, j) * h[j];
      s += h[i] * (0.5 * gh - linear[i]);
    }
    return s;
  }

  std::vector<double> gradient(const std::vector<double>& h) const {
    std::vector<double> g(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      double gh = 0.0;
      for (std::size_t j = 0; j < h.size(); ++j) gh += gram(i, j) * h[j];
      g[i] = gh - linear[i];
    }
    return g;
  }
};

// Exact minimizer of the quadratic on the face spanned by the support of h,
// followed along the segment from h as far as feasibility allows.
inline std::optional<std::vector<double>> refine_on_face(const ColumnQuadratic& q,
                                                         const std::vector<double>& h) {
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i] > 0.0) support.push_back(i);
  const std::size_t s = support.size();
  if (s == 0) return std::nullopt;
  const std::size_t n = s + 1;
  std::vector<double> a(n * n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) a[i * n + j] = q.gram(support[i], support[j]);
    a[i * n + s] = 1.0;
    a[s * n + i] = 1.0;
    rhs[i] = q.linear[support[i]];
  }
  rhs[s] = 1.0;
  const auto sol = solve_linear(std::move(a), std::move(rhs), n);
  if (!sol) return std::nullopt;

  double step = 1.0;
  std::size_t blocking = s;
  for (std::size_t i = 0; i < s; ++i) {
    const double target = (*sol)[i];
    const double from = h[support[i]];
    if (target < 0.0) {
      const double t = from / (from - target);
      if (t < step) {
        step = t;
        blocking = i;
      }
    }
  }
  std::vector<double> out(h.size(), 0.0);
  for (std::size_t i = 0; i < s; ++i) {
    const double from = h[support[i]];
    out[support[i]] = std::max(0.0, from + step * ((*sol)[i] - from));
  }
  if (blocking < s) out[support[blocking]] = 0.0;
  return project_to_simplex(out);
}

struct ConvexSolveStats {
  std::size_t max_iterations_used = 0;
  bool all_converged = true;
};

inline double gradient_mapping_norm(const std::vector<double>& h, const std::vector<double>& g,
                                    double lipschitz) {
  std::vector<double> y(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) y[i] = h[i] - g[i] / lipschitz;
  const auto p = project_to_simplex(y);
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += (h[i] - p[i]) * (h[i] - p[i]);
  return std::sqrt(s);
}

inline DenseMatrix solve_convex_impl(const DenseMatrix& v, const DenseMatrix& w,
                                     const ConvexSolveOptions& opts, ConvexSolveStats& stats) {
  if (w.rows() != v.rows())
    throw DimensionError("solve_convex_coefficients: W has " + std::to_string(w.rows()) +
                         " rows, V has " + std::to_string(v.rows()));
  if (w.cols() == 0) throw ArityError("solve_convex_coefficients: W has no columns");
  if (!(opts.tolerance > 0.0)) throw ConfigError("tolerance", "must be positive");
  if (opts.max_iterations == 0) throw ConfigError("max_iterations", "must be positive");

  const std::size_t k = w.cols(), n = v.cols();
  const DenseMatrix gram = multiply_transposed_left(w, w);  // k x k
  const DenseMatrix cross = multiply_transposed_left(w, v);  // k x n

  // Largest eigenvalue of the Gram matrix (squared spectral norm of W) by
  // power iteration.
  std::vector<double> x(k, 1.0 / std::sqrt(static_cast<double>(k)));
  double lipschitz = 0.0;
  for (int it = 0; it < 20; ++it) {
    std::vector<double> y(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) y[i] += gram(i, j) * x[j];
    double norm = 0.0;
    for (double t : y) norm += t * t;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    lipschitz = norm;
    for (std::size_t i = 0; i < k; ++i) x[i] = y[i] / norm;
  }
  if (!(lipschitz > 0.0)) lipschitz = 1.0;

  DenseMatrix h_out(k, n);
  for (std::size_t c = 0; c < n; ++c) {
    ColumnQuadratic q{gram, std::vector<double>(k)};
    for (std::size_t i = 0; i < k; ++i) q.linear[i] = cross(i, c);

    // Start from the nearest archetype: ||v - w_j||^2 = const - 2 b_j + G_jj.
    std::size_t nearest = 0;
    double nearest_value = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const double val = gram(j, j) - 2.0 * q.linear[j];
      if (val < nearest_value) {
        nearest_value = val;
        nearest = j;
      }
    }
    std::vector<double> h(k, 0.0);
    h[nearest] = 1.0;
    double fh = q.value(h);

    bool converged = false;
    std::size_t iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
      const auto g = q.gradient(h);
      if (gradient_mapping_norm(h, g, lipschitz) < opts.tolerance) {
        converged = true;
        break;
      }
      // Projected gradient step with Armijo backtracking.
      double step = 1.0 / lipschitz;
      std::vector<double> next, y(k);
      double fnext = fh;
      for (int halving = 0; halving < 60; ++halving) {
        for (std::size_t i = 0; i < k; ++i) y[i] = h[i] - step * g[i];
        next = project_to_simplex(y);
        fnext = q.value(next);
        double lin = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          lin += g[i] * (next[i] - h[i]);
          sq += (next[i] - h[i]) * (next[i] - h[i]);
        }
        if (fnext <= fh + lin + sq / (2.0 * step)) break;
        step *= 0.5;
      }
      if (fnext > fh) {
        next = h;
        fnext = fh;
      }
      if (auto refined = refine_on_face(q, next)) {
        const double fr = q.value(*refined);
        if (fr <= fnext) {
          next = std::move(*refined);
          fnext = fr;
        }
      }
      if (next == h) {
        // No progress possible at working precision.
        converged = gradient_mapping_norm(h, g, lipschitz) < opts.tolerance;
        break;
      }
      h = std::move(next);
      fh = fnext;
    }
    stats.max_iterations_used = std::max(stats.max_iterations_used, iter);
    stats.all_converged = stats.all_converged && converged;
    for (std::size_t i = 0; i < k; ++i) h_out(i, c) = h[i];
  }
  return h_out;
}

}  // namespace detail

// Convex coefficients: for each column v_i, the point of the probability
// simplex minimizing ||v_i - W h||^2. Projected gradient with backtracking,
// starting at the nearest archetype; after each step the quadratic is
// minimized exactly on the face the iterate lies in. Stops when the gradient
// mapping (step 1/L) has norm below opts.tolerance.
inline DenseMatrix solve_convex_coefficients(const DenseMatrix& v, const DenseMatrix& w,
                                             const ConvexSolveOptions& opts = {}) {
  detail::ConvexSolveStats stats;
  return detail::solve_convex_impl(v, w, opts, stats);
}

// SIVM selection followed by the convex coefficient solve. W columns are
// copies of data columns.
inline FactorizationResult archetypal_analysis(const DenseMatrix& v, const SolverOptions& opts,
                                               const ConvexSolveOptions& convex = {}) {
  if (v.empty()) throw ConfigError("V", "data matrix is empty");
  const ArchetypeSelection sel = sivm_select(v, opts.k, opts.seed);
  FactorizationResult result;
  result.method = Method::archetypal;
  result.W = detail::gather_columns(v, sel.indices);
  detail::ConvexSolveStats stats;
  result.H = detail::solve_convex_impl(v, result.W, convex, stats);
  result.iterations = stats.max_iterations_used;
  result.converged = stats.all_converged;
  result.source_columns = sel.indices;
  result.reconstruction_error = reconstruction_error(v, result);
  return result;
}

}  // namespace plarch
