#pragma once

// Shared vocabulary of the factorization methods: every method approximates
// a d x n data matrix V by W (d x k basis vectors) times H (k x n coefficients)
// and is scored by the Frobenius norm of the residual.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plarch/error.hpp"
#include "plarch/matrix.hpp"

namespace plarch {

enum class Method { kmeans, cmeans, nmf, pca, archetypal };

inline constexpr std::array<Method, 5> kAllMethods = {Method::kmeans, Method::cmeans, Method::nmf,
                                                      Method::pca, Method::archetypal};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::kmeans: return "kmeans";
    case Method::cmeans: return "cmeans";
    case Method::nmf: return "nmf";
    case Method::pca: return "pca";
    case Method::archetypal: return "archetypal";
  }
  return "unknown";
}

inline std::optional<Method> method_from_string(std::string_view s) {
  for (Method m : kAllMethods)
    if (to_string(m) == s) return m;
  return std::nullopt;
}

struct SolverOptions {
  std::size_t k = 8;
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;  // relative objective change
  double fuzzifier_m = 2.0;
  bool center_pca = false;
  RandomSeed seed{};
};

struct FactorizationResult {
  Method method = Method::kmeans;
  DenseMatrix W;  // d x k, basis vectors as columns
  DenseMatrix H;  // k x n
  std::optional<std::vector<double>> centering;  // length d, PCA only
  double reconstruction_error = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // Objective value after each iteration. Its meaning is method specific:
  // within-cluster sum of squares (kmeans), fuzzy objective (cmeans),
  // residual Frobenius norm (nmf). Empty for closed-form methods.
  std::vector<double> objective_trace;
  // Data columns copied into W (archetypal only).
  std::vector<std::size_t> source_columns;

  std::size_t k() const noexcept { return W.cols(); }
};

// ||(V - centering) - W H||_F, streamed one row at a time so W H is never
// materialized.
inline double reconstruction_error(const DenseMatrix& v, const DenseMatrix& w, const DenseMatrix& h,
                                   const std::optional<std::vector<double>>& centering = {}) {
  if (w.rows() != v.rows() || h.cols() != v.cols() || w.cols() != h.rows())
    throw DimensionError("reconstruction_error: V is " + std::to_string(v.rows()) + "x" +
                         std::to_string(v.cols()) + ", W is " + std::to_string(w.rows()) + "x" +
                         std::to_string(w.cols()) + ", H is " + std::to_string(h.rows()) + "x" +
                         std::to_string(h.cols()));
  if (centering && centering->size() != v.rows())
    throw DimensionError("reconstruction_error: centering length differs from row count");
  const std::size_t n = v.cols();
  std::vector<double> pred(n);
  double total = 0.0;
  for (std::size_t r = 0; r < v.rows(); ++r) {
    std::fill(pred.begin(), pred.end(), centering ? (*centering)[r] : 0.0);
    for (std::size_t j = 0; j < w.cols(); ++j) {
      const double wrj = w(r, j);
      if (wrj == 0.0) continue;
      auto hrow = h.row(j);
      for (std::size_t c = 0; c < n; ++c) pred[c] += wrj * hrow[c];
    }
    auto vrow = v.row(r);
    for (std::size_t c = 0; c < n; ++c) {
      const double t = vrow[c] - pred[c];
      total += t * t;
    }
  }
  return std::sqrt(total);
}

inline double reconstruction_error(const DenseMatrix& v, const FactorizationResult& result) {
  return reconstruction_error(v, result.W, result.H, result.centering);
}

namespace detail {

inline void validate_common(const DenseMatrix& v, const SolverOptions& opts) {
  if (v.empty()) throw ConfigError("V", "data matrix is empty");
  if (opts.k == 0) throw ConfigError("k", "must be positive");
  if (opts.k > v.cols())
    throw ConfigError("k", "k = " + std::to_string(opts.k) + " exceeds the number of columns " +
                               std::to_string(v.cols()));
  if (opts.max_iterations == 0) throw ConfigError("max_iterations", "must be positive");
  if (!(opts.tolerance > 0.0)) throw ConfigError("tolerance", "must be positive");
}

inline bool relative_change_below(double previous, double current, double tolerance) {
  const double denom = std::max(std::abs(previous), 1e-300);
  return std::abs(previous - current) / denom < tolerance;
}

// Greedy farthest-first traversal from a seeded random column. Returns k
// column indices; ties go to the lowest index.
inline std::vector<std::size_t> farthest_first_indices(const DenseMatrix& v, std::size_t k, Rng& rng) {
  std::vector<std::size_t> picked;
  picked.reserve(k);
  picked.push_back(rng.below(v.cols()));
  std::vector<double> nearest = squared_distances_to_columns(v, v.column(picked.front()));
  while (picked.size() < k) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < nearest.size(); ++c)
      if (nearest[c] > nearest[best]) best = c;
    picked.push_back(best);
    const auto d = squared_distances_to_columns(v, v.column(best));
    for (std::size_t c = 0; c < nearest.size(); ++c) nearest[c] = std::min(nearest[c], d[c]);
  }
  return picked;
}

inline DenseMatrix gather_columns(const DenseMatrix& v, const std::vector<std::size_t>& idx) {
  DenseMatrix w(v.rows(), idx.size());
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t j = 0; j < idx.size(); ++j) w(r, j) = v(r, idx[j]);
  return w;
}

// Squared distance from every column of V to every column of W, as a k x n matrix.
inline DenseMatrix column_distances(const DenseMatrix& v, const DenseMatrix& w) {
  DenseMatrix out(w.cols(), v.cols());
  for (std::size_t j = 0; j < w.cols(); ++j) {
    const auto d = squared_distances_to_columns(v, w.column(j));
    auto row = out.row(j);
    std::copy(d.begin(), d.end(), row.begin());
  }
  return out;
}

}  // namespace detail

}  // namespace plarch
