#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "plarch/factorization.hpp"

namespace plarch {

namespace detail {

// Fuzzy memberships (k x n) for squared distances `dist` (k x n). A column
// that coincides with a centroid belongs to it fully (lowest index first).
inline DenseMatrix fuzzy_memberships(const DenseMatrix& dist, double m) {
  const std::size_t k = dist.rows(), n = dist.cols();
  const double exponent = 1.0 / (m - 1.0);
  DenseMatrix u(k, n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t zero = k;
    for (std::size_t j = 0; j < k; ++j)
      if (dist(j, c) == 0.0) {
        zero = j;
        break;
      }
    if (zero < k) {
      u(zero, c) = 1.0;
      continue;
    }
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) s += std::pow(dist(j, c) / dist(l, c), exponent);
      u(j, c) = 1.0 / s;
    }
  }
  return u;
}

// Weighted centroids with weights u^m. A centroid with zero total weight keeps
// its previous position.
inline DenseMatrix fuzzy_centroids(const DenseMatrix& v, const DenseMatrix& u, double m,
                                   const DenseMatrix& previous) {
  const std::size_t k = u.rows(), n = v.cols();
  DenseMatrix weights(k, n);
  std::vector<double> totals(k, 0.0);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t c = 0; c < n; ++c) {
      weights(j, c) = std::pow(u(j, c), m);
      totals[j] += weights(j, c);
    }
  DenseMatrix w = multiply_transposed_right(v, weights);  // d x k
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t j = 0; j < k; ++j)
      w(r, j) = totals[j] > 0.0 ? w(r, j) / totals[j] : previous(r, j);
  return w;
}

inline double fuzzy_objective(const DenseMatrix& dist, const DenseMatrix& u, double m) {
  double s = 0.0;
  for (std::size_t j = 0; j < dist.rows(); ++j)
    for (std::size_t c = 0; c < dist.cols(); ++c) {
      const double uj = u(j, c);
      if (uj > 0.0) s += std::pow(uj, m) * dist(j, c);
    }
  return s;
}

}  // namespace detail

// Fuzzy c-means: alternate membership and centroid updates from the same
// farthest-first seeding as kmeans. H holds the memberships for the final W.
inline FactorizationResult cmeans(const DenseMatrix& v, const SolverOptions& opts) {
  detail::validate_common(v, opts);
  if (!(opts.fuzzifier_m > 1.0)) throw ConfigError("fuzzifier_m", "must be greater than 1");
  const double m = opts.fuzzifier_m;
  Rng rng(opts.seed);
  DenseMatrix w = detail::gather_columns(v, detail::farthest_first_indices(v, opts.k, rng));

  FactorizationResult result;
  result.method = Method::cmeans;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
    const DenseMatrix u = detail::fuzzy_memberships(detail::column_distances(v, w), m);
    w = detail::fuzzy_centroids(v, u, m, w);
    const double objective = detail::fuzzy_objective(detail::column_distances(v, w), u, m);
    result.objective_trace.push_back(objective);
    result.iterations = iter + 1;
    if (detail::relative_change_below(previous, objective, opts.tolerance) || objective == 0.0) {
      result.converged = true;
      break;
    }
    previous = objective;
  }
  result.H = detail::fuzzy_memberships(detail::column_distances(v, w), m);
  result.W = std::move(w);
  result.reconstruction_error = reconstruction_error(v, result);
  return result;
}

}  // namespace plarch
