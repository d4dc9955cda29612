#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "plarch/factorization.hpp"

namespace plarch {

// Floor applied to the denominators of the multiplicative updates.
inline constexpr double kNmfDenominatorFloor = 1e-12;

// Non-negative matrix factorization with the Lee-Seung multiplicative updates
// for the Frobenius objective. objective_trace holds ||V - WH||_F per iteration.
inline FactorizationResult nmf(const DenseMatrix& v, const SolverOptions& opts) {
  detail::validate_common(v, opts);
  if (opts.k > v.rows())
    throw ConfigError("k", "k = " + std::to_string(opts.k) + " exceeds the number of rows " +
                               std::to_string(v.rows()));
  double mean = 0.0;
  for (double x : v.values()) {
    if (x < 0.0) throw DomainError("nmf requires a non-negative data matrix");
    mean += x;
  }
  mean /= static_cast<double>(v.size());

  const std::size_t d = v.rows(), n = v.cols(), k = opts.k;
  const double scale = mean > 0.0 ? std::sqrt(mean / static_cast<double>(k)) : 1.0;
  Rng rng(opts.seed);
  DenseMatrix w(d, k), h(k, n);
  for (double& x : w.values()) x = scale * rng.uniform();
  for (double& x : h.values()) x = scale * rng.uniform();

  FactorizationResult result;
  result.method = Method::nmf;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
    {
      const DenseMatrix numer = multiply_transposed_left(w, v);                       // k x n
      const DenseMatrix denom = multiply(multiply_transposed_left(w, w), h);          // k x n
      auto hv = h.values();
      auto nv = numer.values();
      auto dv = denom.values();
      for (std::size_t i = 0; i < hv.size(); ++i)
        hv[i] *= nv[i] / std::max(dv[i], kNmfDenominatorFloor);
    }
    {
      const DenseMatrix numer = multiply_transposed_right(v, h);                      // d x k
      const DenseMatrix denom = multiply(w, multiply_transposed_right(h, h));         // d x k
      auto wv = w.values();
      auto nv = numer.values();
      auto dv = denom.values();
      for (std::size_t i = 0; i < wv.size(); ++i)
        wv[i] *= nv[i] / std::max(dv[i], kNmfDenominatorFloor);
    }
    const double objective = reconstruction_error(v, w, h);
    result.objective_trace.push_back(objective);
    result.iterations = iter + 1;
    if (detail::relative_change_below(previous, objective, opts.tolerance) || objective == 0.0) {
      result.converged = true;
      break;
    }
    previous = objective;
  }
  result.W = std::move(w);
  result.H = std::move(h);
  result.reconstruction_error = reconstruction_error(v, result);
  return result;
}

}  // namespace plarch
