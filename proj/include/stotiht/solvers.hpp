#pragma once

// Tensor IHT and stochastic Tensor IHT.
//
// Step-size convention: mu is the full-gradient step of
//
//   TIHT:     X+ = H_r(X + mu A*(y - A(X)))                 = H_r(X - mu m grad F(X))
//   StoTIHT:  X+ = H_r(X - mu m / (M p(i)) grad f_i(X)),    i ~ p
//
// so E_i[pre-truncation point] equals the TIHT pre-truncation point, and
// with b = m the stochastic step is the TIHT step. Quoting mu as a multiple
// of m (0.46m, 0.5m, ...) gives O(1) effective steps for Frobenius-normalised
// Gaussian operators with m on the order of N.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "stotiht/hosvd.hpp"
#include "stotiht/random.hpp"
#include "stotiht/sensing.hpp"
#include "stotiht/tensor.hpp"

namespace stotiht {

struct SolverConfig {
  RankTuple rank;
  double mu = 1.0;
  std::size_t batch_size = 0;        // 0 or m selects TIHT
  std::vector<double> probabilities{};  // empty: uniform
  std::size_t max_epochs = 200;
  double success_tol = 1e-5;  // relative recovery error; only used with ground truth
  double cost_tol = 0.0;
  bool stop_at_success = true;
  std::uint64_t seed = 0;
};

enum class RunStatus { converged, max_epochs, diverged };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_epochs: return "max_epochs";
    case RunStatus::diverged: return "diverged";
  }
  return "unknown";
}

struct EpochRecord {
  std::size_t epoch = 0;
  double cost = 0.0;
  std::optional<double> rel_error;
  double seconds = 0.0;  // cumulative wall clock
};

struct RunTrace {
  std::vector<EpochRecord> epochs;
  RunStatus status = RunStatus::max_epochs;
  std::optional<std::size_t> epochs_to_success;  // first epoch with rel_error < success_tol
};

struct RunResult {
  DenseTensor x;
  RunTrace trace;
};

inline constexpr double kDivergenceCost = 1e12;

inline BatchPartition make_partition(const SolverConfig& config, std::size_t m) {
  const std::size_t b = config.batch_size == 0 ? m : config.batch_size;
  if (b > m) throw std::invalid_argument("batch size " + std::to_string(b) + " exceeds m = " + std::to_string(m));
  if (config.probabilities.empty()) return BatchPartition::uniform(m, b);
  return BatchPartition(m, b, config.probabilities);
}

namespace detail {

inline Vector tiht_point(const SensingOperator& op, const Vector& y, const Vector& x, double mu) {
  return x + mu * full_correlation(op, y, x);
}

// X - mu m / (M p(i)) grad f_i(X) = X + (mu / p(i)) A_{b_i}*(y_{b_i} - A_{b_i} X)
inline Vector stotiht_point(const SensingOperator& op, const BatchPartition& part, std::size_t i, const Vector& y,
                            const Vector& x, double mu) {
  return x + (mu / part.probability(i)) * batch_correlation(op, part, i, y, x);
}

inline void require_step_inputs(const SensingOperator& op, const Vector& y, const DenseTensor& x,
                                const RankTuple& rank, const char* what) {
  require_operand(op, x, what);
  require_measurements(op, y, what);
  rank.check_fits(op.shape());
}

}  // namespace detail

/// H_r(x + mu A*(y - A(x))).
inline DenseTensor tiht_step(const SensingOperator& op, const Vector& y, const DenseTensor& x, double mu,
                             const RankTuple& rank) {
  detail::require_step_inputs(op, y, x, rank, "tiht_step");
  return project_rank_r(DenseTensor(op.shape(), detail::tiht_point(op, y, vectorize(x), mu)), rank);
}

/// H_r(x - mu m / (M p(i)) grad f_i(x)) for the sampled batch i.
inline DenseTensor stotiht_step(const SensingOperator& op, const BatchPartition& part, const Vector& y,
                                const DenseTensor& x, double mu, const RankTuple& rank, std::size_t batch) {
  detail::require_step_inputs(op, y, x, rank, "stotiht_step");
  detail::require_partition(op, part);
  return project_rank_r(DenseTensor(op.shape(), detail::stotiht_point(op, part, batch, y, vectorize(x), mu)), rank);
}

/// Pre-truncation point of the stochastic step; exposed for unbiasedness checks.
inline DenseTensor stotiht_gradient_point(const SensingOperator& op, const BatchPartition& part, const Vector& y,
                                          const DenseTensor& x, double mu, std::size_t batch) {
  detail::require_operand(op, x, "stotiht_gradient_point");
  detail::require_measurements(op, y, "stotiht_gradient_point");
  return DenseTensor(op.shape(), detail::stotiht_point(op, part, batch, y, vectorize(x), mu));
}

inline DenseTensor tiht_gradient_point(const SensingOperator& op, const Vector& y, const DenseTensor& x, double mu) {
  detail::require_operand(op, x, "tiht_gradient_point");
  detail::require_measurements(op, y, "tiht_gradient_point");
  return DenseTensor(op.shape(), detail::tiht_point(op, y, vectorize(x), mu));
}

/// One categorical draw with P(i) = p(i).
inline std::size_t sample_batch(const BatchPartition& part, Rng& rng) {
  if (part.count() == 1) {
    rng.discard(1);
    return 0;
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < part.count(); ++i) {
    acc += part.probability(i);
    if (u < acc) return i;
  }
  return part.count() - 1;
}

/// Runs TIHT (b = m) or StoTIHT from X^0 = 0. One epoch is ceil(m/b)
/// iterations; a record is appended after every completed epoch.
inline RunResult run(const SensingOperator& op, const Vector& y, const SolverConfig& config,
                     const DenseTensor* ground_truth = nullptr) {
  detail::require_measurements(op, y, "run");
  config.rank.check_fits(op.shape());
  if (config.max_epochs == 0) throw std::invalid_argument("run: max_epochs must be >= 1");
  if (ground_truth) detail::require_operand(op, *ground_truth, "run");
  const BatchPartition part = make_partition(config, op.m());
  const bool full = part.count() == 1 && config.probabilities.empty();

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  Rng rng(config.seed);
  const double truth_norm = ground_truth ? frobenius_norm(*ground_truth) : 0.0;

  Vector x = Vector::Zero(static_cast<Index>(op.shape().numel()));
  RunTrace trace;
  const auto diverged = [&] {
    trace.status = RunStatus::diverged;
    // Last finite iterate, or zero if even that overflowed.
    DenseTensor last = x.allFinite() ? DenseTensor(op.shape(), x) : DenseTensor(op.shape());
    return RunResult{std::move(last), std::move(trace)};
  };

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const std::size_t iterations = full ? 1 : part.count();
    for (std::size_t it = 0; it < iterations; ++it) {
      Vector point;
      if (full) {
        point = detail::tiht_point(op, y, x, config.mu);
      } else {
        const std::size_t i = sample_batch(part, rng);
        point = detail::stotiht_point(op, part, i, y, x, config.mu);
      }
      if (!point.allFinite() || point.norm() > 1e150) return diverged();
      x = vectorize(project_rank_r(DenseTensor(op.shape(), std::move(point)), config.rank));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    const Vector residual = y - detail::forward(op.rows(), x);
    rec.cost = residual.squaredNorm() / (2.0 * static_cast<double>(op.m()));
    if (!std::isfinite(rec.cost) || rec.cost > kDivergenceCost) return diverged();
    if (ground_truth)
      rec.rel_error = truth_norm > 0.0 ? (x - ground_truth->data()).norm() / truth_norm : x.norm();
    rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    trace.epochs.push_back(rec);

    const bool success = rec.rel_error && *rec.rel_error < config.success_tol;
    if (success && !trace.epochs_to_success) trace.epochs_to_success = epoch;
    if ((success && config.stop_at_success) || rec.cost <= config.cost_tol) {
      trace.status = RunStatus::converged;
      return RunResult{DenseTensor(op.shape(), std::move(x)), std::move(trace)};
    }
  }
  trace.status = RunStatus::max_epochs;
  return RunResult{DenseTensor(op.shape(), std::move(x)), std::move(trace)};
}

inline RunResult run(const SensingOperator& op, const Vector& y, const SolverConfig& config,
                     const DenseTensor& ground_truth) {
  return run(op, y, config, &ground_truth);
}

}  // namespace stotiht
