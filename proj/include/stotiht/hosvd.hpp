#pragma once

// Truncated higher-order SVD (one-pass HOSVD) and Tucker reconstruction.
// project_rank_r is the thresholding operator H_r used by both solvers.

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stotiht/tensor.hpp"

namespace stotiht {

struct ThinSvd {
  Matrix u;  // rows x k, orthonormal columns
  Vector s;  // k = min(rows, cols), nonincreasing
  Matrix v;  // cols x k, orthonormal columns
};

namespace detail {

// Flip each singular pair so the largest-magnitude entry of the left vector
// is positive (first such entry on ties).
inline void fix_signs(Matrix& u, Matrix* v) {
  for (Index k = 0; k < u.cols(); ++k) {
    Index arg = 0;
    u.col(k).cwiseAbs().maxCoeff(&arg);
    if (u(arg, k) < 0.0) {
      u.col(k) *= -1.0;
      if (v) v->col(k) *= -1.0;
    }
  }
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

}  // namespace detail

/// Thin SVD mat = U diag(s) V^T, with a deterministic sign convention.
inline ThinSvd svd_thin(const Matrix& mat) {
  detail::require_finite(mat, "svd_thin");
  Eigen::JacobiSVD<Matrix> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  detail::fix_signs(out.u, &out.v);
  return out;
}

/// Leading `r` left singular vectors of `mat` (same sign convention as svd_thin).
inline Matrix leading_left_singular_vectors(const Matrix& mat, Index r) {
  detail::require_finite(mat, "leading_left_singular_vectors");
  Eigen::JacobiSVD<Matrix> svd(mat, Eigen::ComputeThinU);
  Matrix u = svd.matrixU().leftCols(r);
  detail::fix_signs(u, nullptr);
  return u;
}

/// Core tensor plus one factor matrix per mode.
struct TuckerFactors {
  DenseTensor core;             // shape (r_1, ..., r_d)
  std::vector<Matrix> factors;  // factors[k] is n_k x r_k
};

/// x ×_1 U^(1) ... ×_d U^(d), applied in ascending mode order.
inline DenseTensor reconstruct(const TuckerFactors& t) {
  const Shape& core_shape = t.core.shape();
  if (t.factors.size() != core_shape.order())
    throw std::invalid_argument("reconstruct: " + std::to_string(t.factors.size()) + " factors for order-" +
                                std::to_string(core_shape.order()) + " core");
  DenseTensor x = t.core;
  for (std::size_t k = 0; k < t.factors.size(); ++k) {
    if (static_cast<std::size_t>(t.factors[k].cols()) != core_shape[k])
      throw std::invalid_argument("reconstruct: factor " + std::to_string(k) + " has " +
                                  std::to_string(t.factors[k].cols()) + " columns, core dimension is " +
                                  std::to_string(core_shape[k]));
    x = mode_product(x, t.factors[k], k);
  }
  return x;
}

/// HOSVD truncated to `rank`: factors[k] are the leading r_k left singular
/// vectors of unfold(x, k), and core = x ×_1 U^(1)T ... ×_d U^(d)T.
/// Ties at the truncation boundary keep the columns in the SVD's order.
inline TuckerFactors hosvd_truncate(const DenseTensor& x, const RankTuple& rank) {
  rank.check_fits(x.shape());
  std::vector<Matrix> factors;
  factors.reserve(x.order());
  // One pass: each mode's SVD is of the original tensor's unfolding.
  for (std::size_t k = 0; k < x.order(); ++k)
    factors.push_back(leading_left_singular_vectors(unfold(x, k), static_cast<Index>(rank[k])));
  DenseTensor core = x;
  for (std::size_t k = 0; k < x.order(); ++k) core = mode_product(core, factors[k].transpose(), k);
  return TuckerFactors{std::move(core), std::move(factors)};
}

/// H_r(x) = reconstruct(hosvd_truncate(x, rank)).
inline DenseTensor project_rank_r(const DenseTensor& x, const RankTuple& rank) {
  return reconstruct(hosvd_truncate(x, rank));
}

/// Random Tucker tensor: Gaussian core and Gaussian factors, optionally
/// with the factors orthonormalised (thin Q of a Householder QR).
inline TuckerFactors random_tucker(const Shape& shape, const RankTuple& rank, Rng& rng, bool orthonormal = false) {
  rank.check_fits(shape);
  DenseTensor core = random_gaussian(rank.as_shape(), rng);
  std::vector<Matrix> factors;
  for (std::size_t k = 0; k < shape.order(); ++k) {
    Matrix u = random_gaussian_matrix(static_cast<Index>(shape[k]), static_cast<Index>(rank[k]), rng);
    if (orthonormal) {
      Eigen::HouseholderQR<Matrix> qr(u);
      u = qr.householderQ() * Matrix::Identity(u.rows(), u.cols());
    }
    factors.push_back(std::move(u));
  }
  return TuckerFactors{std::move(core), std::move(factors)};
}

}  // namespace stotiht
