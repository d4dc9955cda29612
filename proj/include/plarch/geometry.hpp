#pragma once

// Simplex volumes from pairwise distances (Cayley-Menger) and Euclidean
// projection onto the probability simplex.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "plarch/error.hpp"
#include "plarch/matrix.hpp"

namespace plarch {

// Relative threshold below which a Cayley-Menger determinant counts as zero.
inline constexpr double kVolumeClampRelative = 1e-12;

// Determinant of an n x n row-major matrix by LU with partial pivoting.
// Takes the matrix by value; it is factored in place.
inline double determinant(std::vector<double> a, std::size_t n) {
  if (a.size() != n * n) throw DimensionError("determinant: matrix is not n x n");
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      det = -det;
    }
    const double diag = a[col * n + col];
    det *= diag;
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / diag;
      if (f == 0.0) continue;
      for (std::size_t c = col + 1; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
    }
  }
  return det;
}

// Squared (m-1)-volume of the simplex whose m vertices have the given m x m
// row-major matrix of pairwise squared distances. Evaluates the bordered
// Cayley-Menger determinant; a determinant below kVolumeClampRelative times
// (largest squared edge)^(m-1) in magnitude, or of the wrong sign, gives 0.
inline double cayley_menger_squared_volume(std::span<const double> sq_dist, std::size_t m) {
  if (m < 2) throw ArityError("simplex volume needs at least two points");
  if (sq_dist.size() != m * m) throw DimensionError("distance matrix is not m x m");
  const std::size_t b = m + 1;
  std::vector<double> bordered(b * b, 0.0);
  double max_edge = 0.0;
  for (std::size_t i = 1; i < b; ++i) {
    bordered[i] = 1.0;
    bordered[i * b] = 1.0;
    for (std::size_t j = 1; j < b; ++j) {
      const double d = sq_dist[(i - 1) * m + (j - 1)];
      bordered[i * b + j] = d;
      max_edge = std::max(max_edge, d);
    }
  }
  if (max_edge == 0.0) return 0.0;
  // det = (-1)^m 2^(m-1) ((m-1)!)^2 V^2
  double factor = std::ldexp(1.0, static_cast<int>(m - 1));
  for (std::size_t i = 2; i < m; ++i) factor *= static_cast<double>(i * i);
  const double det = determinant(std::move(bordered), b);
  if (std::abs(det) < kVolumeClampRelative * std::pow(max_edge, static_cast<double>(m - 1))) return 0.0;
  const double squared = ((m % 2 == 0) ? det : -det) / factor;
  return squared > 0.0 ? squared : 0.0;
}

// (m-1)-dimensional volume of the simplex spanned by `points`, m >= 2.
// Affinely dependent point sets give 0.
inline double cayley_menger_volume(std::span<const std::vector<double>> points) {
  const std::size_t m = points.size();
  if (m < 2) throw ArityError("simplex volume needs at least two points");
  for (const auto& p : points)
    if (p.size() != points.front().size()) throw DimensionError("points differ in dimension");
  std::vector<double> sq(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      sq[i * m + j] = sq[j * m + i] = squared_distance(points[i], points[j]);
  return std::sqrt(cayley_menger_squared_volume(sq, m));
}

// Volume of the simplex spanned by the selected columns of a data matrix.
inline double cayley_menger_volume(const DenseMatrix& v, std::span<const std::size_t> columns) {
  std::vector<std::vector<double>> pts;
  pts.reserve(columns.size());
  for (std::size_t c : columns) {
    if (c >= v.cols()) throw DimensionError("column index out of range");
    pts.push_back(v.column(c));
  }
  return cayley_menger_volume(pts);
}

// Sum tolerance under which an input is already treated as a point of the simplex.
inline constexpr double kSimplexSumTolerance = 1e-12;

// Euclidean projection onto {x : x_i >= 0, sum x_i = 1} by sort and threshold.
// Points already on the simplex (to kSimplexSumTolerance) are returned unchanged,
// which makes the projection exactly idempotent.
inline std::vector<double> project_to_simplex(std::span<const double> v) {
  if (v.empty()) throw ArityError("cannot project an empty vector onto the simplex");
  std::vector<double> out(v.begin(), v.end());
  if (std::all_of(out.begin(), out.end(), [](double x) { return x >= 0.0; })) {
    std::vector<double> sorted = out;
    std::sort(sorted.begin(), sorted.end());
    const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    if (std::abs(total - 1.0) <= kSimplexSumTolerance) return out;
  }
  std::vector<double> u = out;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (double& x : out) x = std::max(x - theta, 0.0);
  return out;
}

}  // namespace plarch
