#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stotiht/hosvd.hpp"
#include "stotiht/sensing.hpp"

namespace stotiht {
namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

double rel(const DenseTensor& a, const DenseTensor& b) {
  return frobenius_norm(a - b) / std::max({frobenius_norm(a), frobenius_norm(b), 1e-300});
}

DenseTensor low_rank(const Shape& s, const RankTuple& r, Rng& rng) { return reconstruct(random_tucker(s, r, rng)); }

// Direct-sum oracle for a cost with prefactor `scale` over rows [lo, hi).
double direct_cost(const SensingOperator& op, const Vector& y, const DenseTensor& x, std::size_t lo, std::size_t hi,
                   double scale) {
  double sum = 0.0;
  for (std::size_t j = lo; j < hi; ++j) {
    const double r = y[static_cast<Index>(j)] - inner(op.sensing_tensor(j), x);
    sum += r * r;
  }
  return 0.5 * scale * sum;
}

TEST(GaussianOperator, UnitFrobeniusNormAndDeterminism) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SensingOperator op = gaussian_operator(Shape{5, 5, 6}, 40 + seed, seed);
    EXPECT_NEAR(op.rows().norm(), 1.0, 1e-12);
    EXPECT_EQ(op.m(), 40 + seed);
  }
  EXPECT_EQ(gaussian_operator(Shape{3, 4}, 7, 5).rows(), gaussian_operator(Shape{3, 4}, 7, 5).rows());
  const SensingOperator one = gaussian_operator(Shape{1}, 1, 99);
  EXPECT_EQ(std::abs(one.rows()(0, 0)), 1.0);
}

TEST(GaussianOperator, IsotropicEntriesAreStandardNormal) {
  const SensingOperator op = gaussian_operator(Shape{10, 10, 10}, 400, 3, Normalization::isotropic);
  const double n = static_cast<double>(op.rows().size());
  const double mean = op.rows().mean();
  const double var = (op.rows().array() - mean).square().sum() / (n - 1);
  EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(n) * 1.7);
  EXPECT_LT(std::abs(var - 1.0), 2e-2);
}

TEST(SensingOperator, RejectsBadRows) {
  EXPECT_THROW(SensingOperator(Matrix::Zero(0, 4), Shape{2, 2}), std::invalid_argument);
  EXPECT_THROW(SensingOperator(Matrix::Zero(2, 5), Shape{2, 2}), std::invalid_argument);
  Matrix bad = Matrix::Zero(2, 4);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(SensingOperator(bad, Shape{2, 2}), std::invalid_argument);
}

TEST(BatchPartition, LayoutAndValidation) {
  const BatchPartition p = BatchPartition::uniform(10, 3);
  EXPECT_EQ(p.count(), 4u);
  EXPECT_EQ(p.begin(3), 9u);
  EXPECT_EQ(p.length(3), 1u);
  EXPECT_EQ(p.length(0), 3u);
  EXPECT_THROW(p.length(4), std::out_of_range);
  EXPECT_EQ(BatchPartition::uniform(10, 10).count(), 1u);
  EXPECT_THROW(BatchPartition::uniform(10, 0), std::invalid_argument);
  EXPECT_THROW(BatchPartition::uniform(10, 11), std::invalid_argument);
  EXPECT_THROW(BatchPartition(4, 2, {1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(BatchPartition(4, 2, {0.6, 0.6}), std::invalid_argument);
  EXPECT_THROW(BatchPartition(4, 2, {1.0}), std::invalid_argument);
  EXPECT_NO_THROW(BatchPartition(4, 2, {0.3, 0.7}));
}

TEST(Apply, TrivialCases) {
  const SensingOperator op = gaussian_operator(Shape{2, 3}, 5, 1);
  EXPECT_EQ(apply(op, DenseTensor(op.shape())), Vector::Zero(5));
  const SensingOperator id(Matrix::Identity(6, 6), Shape{2, 3});
  const DenseTensor x = random_gaussian(Shape{2, 3}, 2);
  EXPECT_EQ(apply(id, x), vectorize(x));
  EXPECT_THROW(apply(op, DenseTensor(Shape{3, 2})), std::invalid_argument);
}

TEST(Apply, MatchesEntrywiseInnerProducts) {
  Rng rng(3);
  const SensingOperator op = gaussian_operator(Shape{3, 4, 2}, 30, rng);
  for (int rep = 0; rep < 10; ++rep) {
    const DenseTensor x = random_gaussian(op.shape(), rng);
    const Vector y = apply(op, x);
    for (std::size_t i = 0; i < op.m(); ++i)
      EXPECT_NEAR(y[static_cast<Index>(i)], inner(op.sensing_tensor(i), x), 1e-12);
  }
}

TEST(Adjoint, TrivialCases) {
  const SensingOperator op = gaussian_operator(Shape{2, 3}, 5, 4);
  EXPECT_EQ(frobenius_norm(adjoint(op, Vector::Zero(5))), 0.0);
  for (std::size_t i = 0; i < op.m(); ++i)
    EXPECT_EQ(adjoint(op, Vector::Unit(5, static_cast<Index>(i))), op.sensing_tensor(i));
  EXPECT_THROW(adjoint(op, Vector::Zero(4)), std::invalid_argument);
}

TEST(Adjoint, IdentityOnHundredRandomPairs) {
  Rng rng(5);
  const SensingOperator op = gaussian_operator(Shape{5, 5, 6}, 120, rng, Normalization::isotropic);
  for (int rep = 0; rep < 100; ++rep) {
    const DenseTensor x = random_gaussian(op.shape(), rng);
    Vector y(120);
    for (Index i = 0; i < y.size(); ++i) y[i] = std::normal_distribution<double>()(rng);
    const double lhs = apply(op, x).dot(y);
    const double rhs = inner(x, adjoint(op, y));
    const double scale = apply(op, x).norm() * y.norm();
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * scale);
  }
}

TEST(ApplyBatch, SlicesConcatenateBitExactly) {
  Rng rng(6);
  for (const auto& [m, b] : std::vector<std::pair<std::size_t, std::size_t>>{{12, 4}, {10, 3}, {7, 7}, {9, 1}}) {
    const SensingOperator op = gaussian_operator(Shape{3, 2, 2}, m, rng);
    const BatchPartition part = BatchPartition::uniform(m, b);
    const DenseTensor x = random_gaussian(op.shape(), rng);
    const Vector full = apply(op, x);
    Vector cat(static_cast<Index>(m));
    for (std::size_t i = 0; i < part.count(); ++i) {
      const Vector yb = apply_batch(op, part, i, x);
      EXPECT_EQ(static_cast<std::size_t>(yb.size()), part.length(i));
      cat.segment(static_cast<Index>(part.begin(i)), yb.size()) = yb;
    }
    EXPECT_EQ(cat, full);
    EXPECT_THROW(apply_batch(op, part, part.count(), x), std::out_of_range);
  }
}

TEST(Cost, ZeroAtTruthAndAtOrigin) {
  Rng rng(7);
  const SensingOperator op = gaussian_operator(Shape{5, 5, 6}, 60, rng);
  const DenseTensor xs = low_rank(op.shape(), RankTuple{1, 2, 2}, rng);
  const Vector y = apply(op, xs);
  EXPECT_LE(cost_full(op, y, xs), 1e-20);
  EXPECT_EQ(cost_full(op, Vector::Zero(60), DenseTensor(op.shape())), 0.0);
  const BatchPartition part = BatchPartition::uniform(60, 25);
  for (std::size_t i = 0; i < part.count(); ++i) EXPECT_LE(cost_batch(op, part, i, y, xs), 1e-20);
}

TEST(Cost, MatchesDirectSumsAndDecomposes) {
  Rng rng(8);
  for (const auto& [m, b] : std::vector<std::pair<std::size_t, std::size_t>>{{60, 15}, {60, 60}, {10, 3}, {61, 20}}) {
    const SensingOperator op = gaussian_operator(Shape{3, 4, 2}, m, rng, Normalization::isotropic);
    const BatchPartition part = BatchPartition::uniform(m, b);
    const DenseTensor x = random_gaussian(op.shape(), rng);
    Vector y(static_cast<Index>(m));
    for (Index i = 0; i < y.size(); ++i) y[i] = std::normal_distribution<double>()(rng);
    const double full = cost_full(op, y, x);
    EXPECT_LE(rel(full, direct_cost(op, y, x, 0, m, 1.0 / static_cast<double>(m))), 1e-12);
    double mean = 0.0;
    const double scale = static_cast<double>(part.count()) / static_cast<double>(m);
    for (std::size_t i = 0; i < part.count(); ++i) {
      const double fi = cost_batch(op, part, i, y, x);
      EXPECT_LE(rel(fi, direct_cost(op, y, x, part.begin(i), part.begin(i) + part.length(i), scale)), 1e-12);
      if (m % b == 0) {
        EXPECT_LE(rel(fi, direct_cost(op, y, x, part.begin(i), part.begin(i) + b, 1.0 / b)), 1e-12);
      }
      mean += fi / static_cast<double>(part.count());
    }
    EXPECT_LE(rel(mean, full), 1e-12);
    if (b == m) {
      EXPECT_LE(rel(cost_batch(op, part, 0, y, x), full), 1e-15);
    }
  }
}

TEST(Gradient, ZeroAtNoiselessTruth) {
  Rng rng(9);
  const SensingOperator op = gaussian_operator(Shape{5, 5, 6}, 90, rng);
  const DenseTensor xs = low_rank(op.shape(), RankTuple{1, 2, 2}, rng);
  const Vector y = apply(op, xs);
  EXPECT_LE(frobenius_norm(grad_full(op, y, xs)), 1e-12);
  const BatchPartition part = BatchPartition::uniform(90, 30);
  for (std::size_t i = 0; i < part.count(); ++i) EXPECT_LE(frobenius_norm(grad_batch(op, part, i, y, xs)), 1e-12);
}

TEST(Gradient, FullBatchEqualsFullGradient) {
  Rng rng(10);
  const SensingOperator op = gaussian_operator(Shape{3, 3, 3}, 20, rng, Normalization::isotropic);
  const DenseTensor x = random_gaussian(op.shape(), rng);
  const Vector y = apply(op, random_gaussian(op.shape(), rng));
  EXPECT_LE(rel(grad_batch(op, BatchPartition::uniform(20, 20), 0, y, x), grad_full(op, y, x)), 1e-15);
}

TEST(Gradient, CentralFiniteDifferences) {
  Rng rng(11);
  const double h = 1e-5;
  for (int rep = 0; rep < 10; ++rep) {
    const SensingOperator op = gaussian_operator(Shape{3, 4, 2}, 30, rng, Normalization::isotropic);
    const BatchPartition part = BatchPartition::uniform(30, 8);
    const DenseTensor x = random_gaussian(op.shape(), rng);
    const Vector y = apply(op, random_gaussian(op.shape(), rng));
    DenseTensor d = random_gaussian(op.shape(), rng);
    d = (1.0 / frobenius_norm(d)) * d;
    const double fd_full = (cost_full(op, y, x + h * d) - cost_full(op, y, x - h * d)) / (2 * h);
    EXPECT_NEAR(fd_full, inner(grad_full(op, y, x), d), 1e-6 * std::max(1.0, std::abs(fd_full)));
    for (std::size_t i = 0; i < part.count(); ++i) {
      const double fd = (cost_batch(op, part, i, y, x + h * d) - cost_batch(op, part, i, y, x - h * d)) / (2 * h);
      EXPECT_NEAR(fd, inner(grad_batch(op, part, i, y, x), d), 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

// sum_i p(i) (1/(M p(i))) grad f_i, enumerated over every batch.
DenseTensor weighted_batch_gradient(const SensingOperator& op, const BatchPartition& part, const Vector& y,
                                    const DenseTensor& x) {
  DenseTensor acc(op.shape());
  const double big_m = static_cast<double>(part.count());
  for (std::size_t i = 0; i < part.count(); ++i)
    acc = acc + (part.probability(i) / (big_m * part.probability(i))) * grad_batch(op, part, i, y, x);
  return acc;
}

TEST(Gradient, UnbiasedUnderUniformAndNonUniformSampling) {
  Rng rng(12);
  struct Case {
    std::size_t m, b;
    std::vector<double> p;
  };
  const std::vector<Case> cases{{60, 15, {}},
                                {60, 15, {0.1, 0.2, 0.3, 0.4}},
                                {10, 3, {}},
                                {10, 3, {0.05, 0.15, 0.5, 0.3}},
                                {61, 20, {0.7, 0.1, 0.1, 0.1}}};
  for (const auto& c : cases)
    for (int rep = 0; rep < 5; ++rep) {
      const SensingOperator op = gaussian_operator(Shape{3, 4, 2}, c.m, rng);
      const BatchPartition part = c.p.empty() ? BatchPartition::uniform(c.m, c.b) : BatchPartition(c.m, c.b, c.p);
      const DenseTensor x = random_gaussian(op.shape(), rng);
      const Vector y = apply(op, random_gaussian(op.shape(), rng));
      EXPECT_LE(rel(weighted_batch_gradient(op, part, y, x), grad_full(op, y, x)), 1e-12) << c.m << "/" << c.b;
    }
}

TEST(Gradient, MonotoneGradientIdentityOnLowRankPairs) {
  Rng rng(13);
  const SensingOperator op = gaussian_operator(Shape{5, 5, 6}, 200, rng);
  const Vector y = apply(op, low_rank(op.shape(), RankTuple{1, 2, 2}, rng));
  for (int rep = 0; rep < 100; ++rep) {
    const DenseTensor x1 = low_rank(op.shape(), RankTuple{1, 2, 2}, rng);
    const DenseTensor x2 = low_rank(op.shape(), RankTuple{1, 2, 2}, rng);
    const double lhs = inner(x2 - x1, grad_full(op, y, x2) - grad_full(op, y, x1));
    const double rhs = apply(op, x2 - x1).squaredNorm() / 200.0;
    EXPECT_LE(rel(lhs, rhs), 1e-12);
  }
}

TEST(Gradient, LipschitzProxyOnLowRankPairs) {
  Rng rng(14);
  const Shape shape{5, 5, 6};
  const RankTuple rank{1, 2, 2};
  for (const auto& [m, b] : std::vector<std::pair<std::size_t, std::size_t>>{{360, 180}, {360, 90}, {360, 360}}) {
    const SensingOperator op = gaussian_operator(shape, m, rng, Normalization::isotropic);
    const BatchPartition part = BatchPartition::uniform(m, b);
    const TripEstimate est = trip_estimate(op, part, rank, 100, 7);
    const double rho_plus = 2.0 * (1.0 + std::max(est.full, est.batch) + 0.1);
    const Vector y = apply(op, low_rank(shape, rank, rng));
    for (int rep = 0; rep < 20; ++rep) {
      const DenseTensor x1 = low_rank(shape, rank, rng), x2 = low_rank(shape, rank, rng);
      const double dx = frobenius_norm(x2 - x1);
      for (std::size_t i = 0; i < part.count(); ++i)
        EXPECT_LE(frobenius_norm(grad_batch(op, part, i, y, x2) - grad_batch(op, part, i, y, x1)), rho_plus * dx);
    }
  }
}

TEST(TripEstimate, ScaledOrthonormalRowsAreAnIsometry) {
  const Shape shape{3, 2, 4};
  const std::size_t n = shape.numel();
  Rng rng(15);
  Eigen::HouseholderQR<Matrix> qr(random_gaussian_matrix(static_cast<Index>(n), static_cast<Index>(n), rng));
  const Matrix q = qr.householderQ();
  const SensingOperator op(std::sqrt(static_cast<double>(n)) * q, shape);
  const TripEstimate est = trip_estimate(op, BatchPartition::uniform(n, n), RankTuple{2, 2, 2}, 20, 3);
  EXPECT_LE(est.full, 1e-10);
  EXPECT_LE(est.batch, 1e-10);
}

TEST(TripEstimate, DeterministicAndMonotoneInTrials) {
  const SensingOperator op = gaussian_operator(Shape{5, 5, 6}, 200, 16, Normalization::isotropic);
  const BatchPartition part = BatchPartition::uniform(200, 50);
  const RankTuple rank{1, 2, 2};
  const TripEstimate a = trip_estimate(op, part, rank, 1, 42), b = trip_estimate(op, part, rank, 1, 42);
  EXPECT_EQ(a.full, b.full);
  EXPECT_EQ(a.batch, b.batch);
  TripEstimate prev = a;
  for (std::size_t trials : {2, 5, 20, 60}) {
    const TripEstimate cur = trip_estimate(op, part, rank, trials, 42);
    EXPECT_GE(cur.full, prev.full);
    EXPECT_GE(cur.batch, prev.batch);
    prev = cur;
  }
  EXPECT_THROW(trip_estimate(op, part, rank, 0, 42), std::invalid_argument);
}

}  // namespace
}  // namespace stotiht
