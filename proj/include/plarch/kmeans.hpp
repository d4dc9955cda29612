#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "plarch/factorization.hpp"

namespace plarch {

namespace detail {

// Nearest centroid per column, ties to the lowest index. Fills `cost` with
// the squared distance to the chosen centroid.
inline std::vector<std::size_t> nearest_labels(const DenseMatrix& dist, std::vector<double>& cost) {
  const std::size_t k = dist.rows(), n = dist.cols();
  std::vector<std::size_t> labels(n, 0);
  cost.assign(n, std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < k; ++j) {
    auto row = dist.row(j);
    for (std::size_t c = 0; c < n; ++c)
      if (row[c] < cost[c]) {
        cost[c] = row[c];
        labels[c] = j;
      }
  }
  return labels;
}

inline DenseMatrix cluster_means(const DenseMatrix& v, const std::vector<std::size_t>& labels,
                                 std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t l : labels) ++counts[l];
  DenseMatrix w(v.rows(), k);
  for (std::size_t r = 0; r < v.rows(); ++r) {
    auto vrow = v.row(r);
    auto wrow = w.row(r);
    for (std::size_t c = 0; c < v.cols(); ++c) wrow[labels[c]] += vrow[c];
    for (std::size_t j = 0; j < k; ++j)
      if (counts[j] > 0) wrow[j] /= static_cast<double>(counts[j]);
  }
  return w;
}

}  // namespace detail

// Lloyd's algorithm from a farthest-first seeding. H is unary: column i has a
// single 1 in the row of its cluster.
inline FactorizationResult kmeans(const DenseMatrix& v, const SolverOptions& opts) {
  detail::validate_common(v, opts);
  const std::size_t k = opts.k, n = v.cols();
  Rng rng(opts.seed);
  DenseMatrix w = detail::gather_columns(v, detail::farthest_first_indices(v, k, rng));

  FactorizationResult result;
  result.method = Method::kmeans;
  std::vector<std::size_t> labels;
  std::vector<double> cost;
  double previous = std::numeric_limits<double>::infinity();

  for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
    auto next = detail::nearest_labels(detail::column_distances(v, w), cost);

    // Empty cluster repair: the column farthest from its centroid, taken from
    // a cluster that can spare it, becomes a singleton.
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t l : next) ++counts[l];
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      std::size_t far = n;
      for (std::size_t c = 0; c < n; ++c)
        if (counts[next[c]] > 1 && (far == n || cost[c] > cost[far])) far = c;
      if (far == n) break;
      --counts[next[far]];
      next[far] = j;
      counts[j] = 1;
      cost[far] = 0.0;
    }

    const bool unchanged = next == labels;
    labels = std::move(next);
    w = detail::cluster_means(v, labels, k);

    double objective = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < v.rows(); ++r) {
        const double t = v(r, c) - w(r, labels[c]);
        s += t * t;
      }
      objective += s;
    }
    result.objective_trace.push_back(objective);
    result.iterations = iter + 1;
    if (unchanged || detail::relative_change_below(previous, objective, opts.tolerance) ||
        objective == 0.0) {
      result.converged = true;
      break;
    }
    previous = objective;
  }

  DenseMatrix h(k, n);
  for (std::size_t c = 0; c < n; ++c) h(labels[c], c) = 1.0;
  result.W = std::move(w);
  result.H = std::move(h);
  result.reconstruction_error = reconstruction_error(v, result);
  return result;
}

}  // namespace plarch
