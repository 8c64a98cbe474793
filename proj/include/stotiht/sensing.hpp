#pragma once

// Linear measurement model y = A(X), its batched decomposition
//
//   F(X) = 1/(2m) ||y - A(X)||^2 = 1/M sum_i f_i(X),
//   f_i(X) = M/(2m) ||y_{b_i} - A_{b_i}(X)||^2,
//
// M/m is 1/b whenever b divides m. For a ragged final batch it is the mean
// batch length, which keeps the decomposition (and so unbiasedness) exact.
// Also provides the full and partial gradients and an empirical probe of the
// tensor RIP.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stotiht/hosvd.hpp"
#include "stotiht/random.hpp"
#include "stotiht/tensor.hpp"

namespace stotiht {

/// m sensing tensors, stored as the rows of one row-major m x N matrix.
class SensingOperator {
 public:
  SensingOperator(RowMatrix rows, Shape shape) : rows_(std::move(rows)), shape_(std::move(shape)) {
    if (rows_.rows() < 1) throw std::invalid_argument("SensingOperator: need at least one measurement");
    if (static_cast<std::size_t>(rows_.cols()) != shape_.numel())
      throw std::invalid_argument("SensingOperator: " + std::to_string(rows_.cols()) +
                                  " columns for tensor shape " + shape_.to_string());
    if (!rows_.allFinite()) throw std::invalid_argument("SensingOperator: non-finite entry");
  }

  std::size_t m() const noexcept { return static_cast<std::size_t>(rows_.rows()); }
  const RowMatrix& rows() const noexcept { return rows_; }
  const Shape& shape() const noexcept { return shape_; }

  /// The i-th sensing tensor A_i.
  DenseTensor sensing_tensor(std::size_t i) const {
    return DenseTensor(shape_, rows_.row(static_cast<Index>(i)).transpose());
  }

 private:
  RowMatrix rows_;
  Shape shape_;
};

/// Contiguous split of m measurements into M = ceil(m / b) batches, with
/// sampling probabilities p(i). The last batch is shorter when b does not divide m.
class BatchPartition {
 public:
  static BatchPartition uniform(std::size_t m, std::size_t b) {
    if (b == 0 || b > m) throw std::invalid_argument("BatchPartition: need 1 <= b <= m");
    const std::size_t count = (m + b - 1) / b;
    return BatchPartition(m, b, std::vector<double>(count, 1.0 / static_cast<double>(count)));
  }

  BatchPartition(std::size_t m, std::size_t b, std::vector<double> probabilities)
      : m_(m), b_(b), p_(std::move(probabilities)) {
    if (b_ == 0 || b_ > m_) throw std::invalid_argument("BatchPartition: need 1 <= b <= m");
    const std::size_t count = (m_ + b_ - 1) / b_;
    if (p_.size() != count)
      throw std::invalid_argument("BatchPartition: " + std::to_string(p_.size()) + " probabilities for " +
                                  std::to_string(count) + " batches");
    double sum = 0.0;
    for (double p : p_) {
      if (!(p > 0.0)) throw std::invalid_argument("BatchPartition: every probability must be > 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("BatchPartition: probabilities must sum to 1");
  }

  std::size_t m() const noexcept { return m_; }
  std::size_t batch_size() const noexcept { return b_; }
  std::size_t count() const noexcept { return p_.size(); }
  double probability(std::size_t i) const { return p_.at(i); }
  const std::vector<double>& probabilities() const noexcept { return p_; }
  double min_probability() const { return *std::min_element(p_.begin(), p_.end()); }

  std::size_t begin(std::size_t i) const {
    check(i);
    return i * b_;
  }
  std::size_t length(std::size_t i) const {
    check(i);
    return std::min(b_, m_ - i * b_);
  }

 private:
  void check(std::size_t i) const {
    if (i >= p_.size())
      throw std::out_of_range("BatchPartition: batch " + std::to_string(i) + " of " + std::to_string(p_.size()));
  }

  std::size_t m_, b_;
  std::vector<double> p_;
};

enum class Normalization {
  frobenius,  // every entry divided by ||A||_F, so the whole matrix has unit norm
  isotropic,  // raw N(0, 1) entries: (1/m) E||A(X)||^2 = ||X||^2
};

inline SensingOperator gaussian_operator(const Shape& shape, std::size_t m, Rng& rng,
                                         Normalization norm = Normalization::frobenius) {
  if (m == 0) throw std::invalid_argument("gaussian_operator: m must be >= 1");
  // Row i is vec(A_i); draw row by row so each sensing tensor is contiguous in the stream.
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix a(static_cast<Index>(m), static_cast<Index>(shape.numel()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = normal(rng);
  if (norm == Normalization::frobenius) a /= a.norm();
  return SensingOperator(std::move(a), shape);
}

inline SensingOperator gaussian_operator(const Shape& shape, std::size_t m, std::uint64_t seed,
                                         Normalization norm = Normalization::frobenius) {
  Rng rng(seed);
  return gaussian_operator(shape, m, rng, norm);
}

namespace detail {

inline void require_operand(const SensingOperator& op, const DenseTensor& x, const char* what) {
  if (x.shape() != op.shape())
    throw std::invalid_argument(std::string(what) + ": tensor shape " + x.shape().to_string() +
                                " does not match operator shape " + op.shape().to_string());
}

inline void require_measurements(const SensingOperator& op, const Vector& y, const char* what) {
  if (static_cast<std::size_t>(y.size()) != op.m())
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(y.size()) + " measurements, operator has " +
                                std::to_string(op.m()));
}

inline void require_partition(const SensingOperator& op, const BatchPartition& part) {
  if (part.m() != op.m()) throw std::invalid_argument("partition covers a different number of measurements");
}

// rows * x as one dot product per row. Every entry is computed the same way
// whichever block it sits in, so batch and full residuals agree bit for bit.
template <class Rows>
Vector forward(const Rows& rows, const Vector& x) {
  Vector out(rows.rows());
  for (Index j = 0; j < rows.rows(); ++j) out[j] = rows.row(j).dot(x);
  return out;
}

// A_{b_i} as a row block.
inline auto batch_rows(const SensingOperator& op, const BatchPartition& part, std::size_t i) {
  return op.rows().middleRows(static_cast<Index>(part.begin(i)), static_cast<Index>(part.length(i)));
}

// Unnormalised partial correlation A_{b_i}^T (y_{b_i} - A_{b_i} x) on flat data.
inline Vector batch_correlation(const SensingOperator& op, const BatchPartition& part, std::size_t i,
                                const Vector& y, const Vector& x) {
  const auto rows = batch_rows(op, part, i);
  const Vector residual = y.segment(static_cast<Index>(part.begin(i)), rows.rows()) - forward(rows, x);
  return rows.transpose() * residual;
}

inline Vector full_correlation(const SensingOperator& op, const Vector& y, const Vector& x) {
  const Vector residual = y - forward(op.rows(), x);
  return op.rows().transpose() * residual;
}

}  // namespace detail

/// y(i) = <A_i, x>.
inline Vector apply(const SensingOperator& op, const DenseTensor& x) {
  detail::require_operand(op, x, "apply");
  return detail::forward(op.rows(), vectorize(x));
}

/// A*(y) = sum_i y(i) A_i.
inline DenseTensor adjoint(const SensingOperator& op, const Vector& y) {
  detail::require_measurements(op, y, "adjoint");
  return devectorize(op.rows().transpose() * y, op.shape());
}

/// A_{b_i}(x): the slice of apply(op, x) belonging to batch i.
inline Vector apply_batch(const SensingOperator& op, const BatchPartition& part, std::size_t i, const DenseTensor& x) {
  detail::require_operand(op, x, "apply_batch");
  detail::require_partition(op, part);
  return detail::forward(detail::batch_rows(op, part, i), vectorize(x));
}

inline double cost_full(const SensingOperator& op, const Vector& y, const DenseTensor& x) {
  detail::require_measurements(op, y, "cost_full");
  return (y - apply(op, x)).squaredNorm() / (2.0 * static_cast<double>(op.m()));
}

/// Prefactor M/m of f_i and grad f_i.
inline double batch_scale(const BatchPartition& part) {
  return static_cast<double>(part.count()) / static_cast<double>(part.m());
}

/// f_i(x) = M/(2m) ||y_{b_i} - A_{b_i}(x)||^2.
inline double cost_batch(const SensingOperator& op, const BatchPartition& part, std::size_t i, const Vector& y,
                         const DenseTensor& x) {
  detail::require_measurements(op, y, "cost_batch");
  const Vector r = y.segment(static_cast<Index>(part.begin(i)), static_cast<Index>(part.length(i))) -
                   apply_batch(op, part, i, x);
  return 0.5 * batch_scale(part) * r.squaredNorm();
}

/// grad F(x) = (1/m) A*(A(x) - y).
inline DenseTensor grad_full(const SensingOperator& op, const Vector& y, const DenseTensor& x) {
  detail::require_operand(op, x, "grad_full");
  detail::require_measurements(op, y, "grad_full");
  return devectorize(-detail::full_correlation(op, y, vectorize(x)) / static_cast<double>(op.m()), op.shape());
}

/// grad f_i(x) = (M/m) A_{b_i}*(A_{b_i}(x) - y_{b_i}).
inline DenseTensor grad_batch(const SensingOperator& op, const BatchPartition& part, std::size_t i, const Vector& y,
                              const DenseTensor& x) {
  detail::require_operand(op, x, "grad_batch");
  detail::require_measurements(op, y, "grad_batch");
  detail::require_partition(op, part);
  return devectorize(-batch_scale(part) * detail::batch_correlation(op, part, i, y, vectorize(x)), op.shape());
}

/// Empirical lower bounds on the TRIP constant.
struct TripEstimate {
  double full = 0.0;   // max |(1/m)||A(X)||^2 - 1|
  double batch = 0.0;  // max over batches of max(0, (1/b_i)||A_{b_i}(X)||^2 - 1)
};

/// Unit-norm random tensor of Tucker rank `rank`: Gaussian core, orthonormalised Gaussian factors.
inline DenseTensor random_unit_low_rank(const Shape& shape, const RankTuple& rank, Rng& rng) {
  DenseTensor x = reconstruct(random_tucker(shape, rank, rng, /*orthonormal=*/true));
  return (1.0 / frobenius_norm(x)) * x;
}

/// Samples `trials` unit-norm rank-r tensors; trial t uses derive_seed(seed, {t}),
/// so a larger trial count always sees a superset of samples.
inline TripEstimate trip_estimate(const SensingOperator& op, const BatchPartition& part, const RankTuple& rank,
                                  std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("trip_estimate: trials must be >= 1");
  detail::require_partition(op, part);
  rank.check_fits(op.shape());
  TripEstimate est;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {t}));
    const DenseTensor x = random_unit_low_rank(op.shape(), rank, rng);
    const Vector ax = apply(op, x);
    est.full = std::max(est.full, std::abs(ax.squaredNorm() / static_cast<double>(op.m()) - 1.0));
    for (std::size_t i = 0; i < part.count(); ++i) {
      const double len = static_cast<double>(part.length(i));
      const double ratio = ax.segment(static_cast<Index>(part.begin(i)), static_cast<Index>(part.length(i))).squaredNorm() / len;
      est.batch = std::max(est.batch, ratio - 1.0);
    }
  }
  return est;
}

}  // namespace stotiht
