#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "plarch/factorization.hpp"

namespace plarch {

// Truncated singular value decomposition: W holds the top-k left singular
// vectors, H = W^T (V - centering). Uncentered unless opts.center_pca.
inline FactorizationResult pca(const DenseMatrix& v, const SolverOptions& opts) {
  detail::validate_common(v, opts);
  if (opts.k > v.rows())
    throw ConfigError("k", "k = " + std::to_string(opts.k) + " exceeds the number of rows " +
                               std::to_string(v.rows()));
  const std::size_t d = v.rows(), n = v.cols(), k = opts.k;

  FactorizationResult result;
  result.method = Method::pca;

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::MatrixXd data = Eigen::Map<const RowMajor>(v.values().data(), static_cast<Eigen::Index>(d),
                                                    static_cast<Eigen::Index>(n));
  if (opts.center_pca) {
    const Eigen::VectorXd mean = data.rowwise().mean();
    data.colwise() -= mean;
    result.centering = std::vector<double>(mean.data(), mean.data() + mean.size());
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinU);
  Eigen::MatrixXd basis = svd.matrixU().leftCols(static_cast<Eigen::Index>(k));
  // Fix the sign of each vector so its largest-magnitude entry is positive.
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index arg = 0;
    basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, j) < 0.0) basis.col(j) *= -1.0;
  }
  const Eigen::MatrixXd coeffs = basis.transpose() * data;

  result.W = DenseMatrix(d, k);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t j = 0; j < k; ++j)
      result.W.set(r, j, basis(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
  result.H = DenseMatrix(k, n);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t c = 0; c < n; ++c)
      result.H.set(j, c, coeffs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)));
  result.iterations = 1;
  result.converged = true;
  result.reconstruction_error = reconstruction_error(v, result);
  return result;
}

}  // namespace plarch
