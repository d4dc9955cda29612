#pragma once

// Dense row-major matrices, distances and seeded randomness.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "plarch/error.hpp"

namespace plarch {

// Row-major dense matrix of finite doubles. A data matrix V stores one
// observation per column (d rows = features, n columns = samples).
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {
    check_finite_value(fill);
  }

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_)
      throw DimensionError("matrix value count " + std::to_string(values_.size()) +
                           " does not match " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    for (double v : values_) check_finite_value(v);
  }

  // Builds a matrix from a list of rows.
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const std::size_t c = rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * c);
    for (const auto& r : rows) {
      if (r.size() != c) throw DimensionError("ragged row list");
      values.insert(values.end(), r.begin(), r.end());
    }
    return {rows.size(), c, std::move(values)};
  }

  // Builds a matrix whose columns are the given vectors.
  static DenseMatrix from_columns(const std::vector<std::vector<double>>& cols) {
    if (cols.empty()) return {};
    const std::size_t r = cols.front().size();
    DenseMatrix m(r, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j].size() != r) throw DimensionError("ragged column list");
      for (std::size_t i = 0; i < r; ++i) m.set(i, j, cols[j][i]);
    }
    return m;
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }
  // Unchecked mutable access; callers are responsible for keeping entries finite.
  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }

  // Checked write that preserves the finiteness invariant.
  void set(std::size_t r, std::size_t c, double v) {
    check_finite_value(v);
    values_[r * cols_ + c] = v;
  }

  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = values_[r * cols_ + c];
    return out;
  }

  void set_column(std::size_t c, std::span<const double> v) {
    if (v.size() != rows_) throw DimensionError("column length mismatch");
    for (std::size_t r = 0; r < rows_; ++r) set(r, c, v[r]);
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  DenseMatrix transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t.values_[c * rows_ + r] = values_[r * cols_ + c];
    return t;
  }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  static void check_finite_value(double v) {
    if (!std::isfinite(v)) throw DomainError("non-finite matrix entry");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

inline DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("subtract: shape mismatch");
  DenseMatrix out(a.rows(), a.cols());
  auto av = a.values();
  auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
  return out;
}

inline DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("multiply: inner dimensions differ");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      auto brow = b.row(p);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aip * brow[j];
    }
  }
  return out;
}

// A^T B without forming the transpose.
inline DenseMatrix multiply_transposed_left(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("multiply: row counts differ");
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t p = 0; p < a.rows(); ++p) {
    auto arow = a.row(p);
    auto brow = b.row(p);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double api = arow[i];
      if (api == 0.0) continue;
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += api * brow[j];
    }
  }
  return out;
}

// A B^T without forming the transpose.
inline DenseMatrix multiply_transposed_right(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("multiply: column counts differ");
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto brow = b.row(j);
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += arow[p] * brow[p];
      out(i, j) = s;
    }
  }
  return out;
}

inline double frobenius_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v * v;
  return std::sqrt(s);
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DimensionError("squared_distance: lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

// Squared distances from `point` (length rows) to every column of `m`.
// Row-major sweep, so the cost is one pass over the matrix.
inline std::vector<double> squared_distances_to_columns(const DenseMatrix& m,
                                                        std::span<const double> point) {
  if (point.size() != m.rows()) throw DimensionError("point length does not match matrix rows");
  std::vector<double> acc(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double p = point[r];
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double t = row[c] - p;
      acc[c] += t * t;
    }
  }
  return acc;
}

// Squared distance between columns a and b of m.
inline double column_squared_distance(const DenseMatrix& m, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double t = m(r, a) - m(r, b);
    s += t * t;
  }
  return s;
}

struct RandomSeed {
  std::uint64_t value = 0;
  friend bool operator==(const RandomSeed&, const RandomSeed&) = default;
};

// Thin wrapper over mt19937_64 with portable real/integer draws (the
// standard distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(RandomSeed seed) : engine_(seed.value) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace plarch
