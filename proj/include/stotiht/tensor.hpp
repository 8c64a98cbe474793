#pragma once

// Dense order-d tensors stored column-major (first index fastest), and the
// basic multilinear algebra on them: vectorization, mode-k unfolding,
// inner product, Frobenius norm and mode-k matrix products.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stotiht/random.hpp"

namespace stotiht {

using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Dimensions (n_1, ..., n_d) of an order-d tensor.
class Shape {
 public:
  explicit Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) { validate(); }
  Shape(std::initializer_list<std::size_t> dims) : dims_(dims) { validate(); }

  std::size_t order() const noexcept { return dims_.size(); }
  std::size_t operator[](std::size_t k) const { return dims_.at(k); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t numel() const noexcept { return numel_; }

  /// Same shape with dimension k replaced.
  Shape with_dim(std::size_t k, std::size_t n) const {
    auto d = dims_;
    d.at(k) = n;
    return Shape(std::move(d));
  }

  std::string to_string(char sep = 'x') const {
    std::string s;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (k) s += sep;
      s += std::to_string(dims_[k]);
    }
    return s;
  }

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  void validate() {
    if (dims_.empty()) throw std::invalid_argument("Shape: order must be >= 1");
    numel_ = 1;
    for (std::size_t n : dims_) {
      if (n == 0) throw std::invalid_argument("Shape: every dimension must be >= 1");
      if (numel_ > static_cast<std::size_t>(std::numeric_limits<Index>::max()) / n)
        throw std::invalid_argument("Shape: element count overflows");
      numel_ *= n;
    }
  }

  std::vector<std::size_t> dims_;
  std::size_t numel_ = 1;
};

/// Tucker rank (r_1, ..., r_d).
class RankTuple {
 public:
  explicit RankTuple(std::vector<std::size_t> ranks) : ranks_(std::move(ranks)) {
    if (ranks_.empty()) throw std::invalid_argument("RankTuple: empty");
    for (std::size_t r : ranks_)
      if (r == 0) throw std::invalid_argument("RankTuple: ranks must be >= 1");
  }
  RankTuple(std::initializer_list<std::size_t> ranks) : RankTuple(std::vector<std::size_t>(ranks)) {}

  std::size_t order() const noexcept { return ranks_.size(); }
  std::size_t operator[](std::size_t k) const { return ranks_.at(k); }
  const std::vector<std::size_t>& ranks() const noexcept { return ranks_; }

  /// Throws unless 1 <= r_k <= n_k for every mode.
  void check_fits(const Shape& shape) const {
    if (shape.order() != order())
      throw std::invalid_argument("RankTuple: order differs from tensor order");
    for (std::size_t k = 0; k < order(); ++k)
      if (ranks_[k] > shape[k])
        throw std::invalid_argument("RankTuple: rank " + std::to_string(ranks_[k]) +
                                    " exceeds dimension " + std::to_string(shape[k]) +
                                    " in mode " + std::to_string(k));
  }

  /// Componentwise min(factor * r_k, n_k).
  RankTuple scaled_clipped(std::size_t factor, const Shape& shape) const {
    check_fits(shape);
    std::vector<std::size_t> r(order());
    for (std::size_t k = 0; k < order(); ++k) r[k] = std::min(factor * ranks_[k], shape[k]);
    return RankTuple(std::move(r));
  }

  std::size_t max() const { return *std::max_element(ranks_.begin(), ranks_.end()); }

  /// The core shape of a Tucker tensor with this rank.
  Shape as_shape() const { return Shape(ranks_); }

  std::string to_string(char sep = 'x') const { return as_shape().to_string(sep); }

  friend bool operator==(const RankTuple&, const RankTuple&) = default;

 private:
  std::vector<std::size_t> ranks_;
};

/// Order-d real tensor. Immutable once constructed; all entries finite.
class DenseTensor {
 public:
  /// Zero tensor.
  explicit DenseTensor(Shape shape) : shape_(std::move(shape)), data_(Vector::Zero(static_cast<Index>(shape_.numel()))) {}

  DenseTensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<std::size_t>(data_.size()) != shape_.numel())
      throw std::invalid_argument("DenseTensor: data length " + std::to_string(data_.size()) +
                                  " does not match shape " + shape_.to_string());
    if (!data_.allFinite()) throw std::invalid_argument("DenseTensor: non-finite entry");
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t order() const noexcept { return shape_.order(); }
  std::size_t numel() const noexcept { return shape_.numel(); }
  const Vector& data() const noexcept { return data_; }

  /// Element access by a full multi-index (0-based).
  double operator()(std::span<const std::size_t> idx) const { return data_[linear_index(idx)]; }
  double operator()(std::initializer_list<std::size_t> idx) const {
    return (*this)(std::span<const std::size_t>(idx.begin(), idx.size()));
  }

  std::size_t linear_index(std::span<const std::size_t> idx) const {
    if (idx.size() != order()) throw std::invalid_argument("DenseTensor: index order mismatch");
    std::size_t lin = 0, stride = 1;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] >= shape_[k]) throw std::out_of_range("DenseTensor: index out of range");
      lin += idx[k] * stride;
      stride *= shape_[k];
    }
    return lin;
  }

  friend bool operator==(const DenseTensor& a, const DenseTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  Vector data_;
};

namespace detail {

inline void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* what) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(what) + ": shape mismatch (" + a.shape().to_string() +
                                " vs " + b.shape().to_string() + ")");
}

inline void require_mode(const Shape& shape, std::size_t mode) {
  if (mode >= shape.order())
    throw std::invalid_argument("mode " + std::to_string(mode) + " out of range for order " +
                                std::to_string(shape.order()));
}

// Column-major data viewed as (left, n_mode, right) with left = prod of dims
// before the mode and right = prod of dims after it.
struct ModeSplit {
  Index left = 1, n = 1, right = 1;
};

inline ModeSplit split(const Shape& shape, std::size_t mode) {
  ModeSplit s;
  for (std::size_t k = 0; k < mode; ++k) s.left *= static_cast<Index>(shape[k]);
  s.n = static_cast<Index>(shape[mode]);
  for (std::size_t k = mode + 1; k < shape.order(); ++k) s.right *= static_cast<Index>(shape[k]);
  return s;
}

}  // namespace detail

inline DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) {
  detail::require_same_shape(a, b, "operator+");
  return DenseTensor(a.shape(), a.data() + b.data());
}

inline DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
  detail::require_same_shape(a, b, "operator-");
  return DenseTensor(a.shape(), a.data() - b.data());
}

inline DenseTensor operator*(double s, const DenseTensor& a) { return DenseTensor(a.shape(), s * a.data()); }

/// vec(X) = vec(X_(1)); with column-major storage this is the flat data.
inline Vector vectorize(const DenseTensor& x) { return x.data(); }

inline DenseTensor devectorize(Vector v, const Shape& shape) { return DenseTensor(shape, std::move(v)); }

/// Mode-k unfolding (0-based k): an n_k x (N / n_k) matrix whose columns
/// order the remaining indices with lower modes varying fastest.
inline Matrix unfold(const DenseTensor& x, std::size_t mode) {
  detail::require_mode(x.shape(), mode);
  const auto [left, n, right] = detail::split(x.shape(), mode);
  Matrix out(n, left * right);
  const double* src = x.data().data();
  for (Index c = 0; c < right; ++c)
    for (Index i = 0; i < n; ++i)
      for (Index a = 0; a < left; ++a) out(i, a + left * c) = src[a + left * (i + n * c)];
  return out;
}

/// Inverse of unfold.
inline DenseTensor fold(const Matrix& mat, std::size_t mode, const Shape& shape) {
  detail::require_mode(shape, mode);
  const auto [left, n, right] = detail::split(shape, mode);
  if (mat.rows() != n || mat.cols() != left * right)
    throw std::invalid_argument("fold: matrix is " + std::to_string(mat.rows()) + "x" +
                                std::to_string(mat.cols()) + ", expected " + std::to_string(n) +
                                "x" + std::to_string(left * right));
  Vector data(static_cast<Index>(shape.numel()));
  for (Index c = 0; c < right; ++c)
    for (Index i = 0; i < n; ++i)
      for (Index a = 0; a < left; ++a) data[a + left * (i + n * c)] = mat(i, a + left * c);
  return DenseTensor(shape, std::move(data));
}

/// <x1, x2> = vec(x2)^T vec(x1).
inline double inner(const DenseTensor& x1, const DenseTensor& x2) {
  detail::require_same_shape(x1, x2, "inner");
  return x2.data().dot(x1.data());
}

inline double frobenius_norm(const DenseTensor& x) { return std::sqrt(inner(x, x)); }

/// Mode-k product x ×_k u, u of size p x n_k. The result has n_k replaced by p
/// and satisfies unfold(result, k) = u * unfold(x, k).
inline DenseTensor mode_product(const DenseTensor& x, const Matrix& u, std::size_t mode) {
  detail::require_mode(x.shape(), mode);
  const auto [left, n, right] = detail::split(x.shape(), mode);
  if (u.cols() != n)
    throw std::invalid_argument("mode_product: matrix has " + std::to_string(u.cols()) +
                                " columns, mode " + std::to_string(mode) + " has size " +
                                std::to_string(n));
  const Index p = u.rows();
  Vector out(left * p * right);
  // Each slab c is a left x n column-major block; its image is slab * u^T.
  for (Index c = 0; c < right; ++c) {
    Eigen::Map<const Matrix> slab(x.data().data() + c * left * n, left, n);
    Eigen::Map<Matrix> dst(out.data() + c * left * p, left, p);
    dst.noalias() = slab * u.transpose();
  }
  return DenseTensor(x.shape().with_dim(mode, static_cast<std::size_t>(p)), std::move(out));
}

/// I.i.d. N(0, 1) entries.
inline DenseTensor random_gaussian(const Shape& shape, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector data(static_cast<Index>(shape.numel()));
  for (Index i = 0; i < data.size(); ++i) data[i] = normal(rng);
  return DenseTensor(shape, std::move(data));
}

inline DenseTensor random_gaussian(const Shape& shape, std::uint64_t seed) {
  Rng rng(seed);
  return random_gaussian(shape, rng);
}

inline Matrix random_gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Column-major fill order, so a draw sequence maps to the same matrix on every platform.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

}  // namespace stotiht
