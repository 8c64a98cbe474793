#pragma once

// Convergence constants for StoTIHT under the tensor RIP:
//
//   rho+ = 2 (1 + delta),  rho- = 1 - delta,  alpha = max_i rho+ / (M p(i))
//   kappa = 2 sqrt(1 - (2 - mu alpha) mu rho-)
//         + sqrt(eta^2 - 1) sqrt(1 + mu^2 alpha rho+ - 2 mu rho-)
//   sigma = mu / (M min p) (2 E||P_U grad f_i(X*)|| + sqrt(eta^2 - 1) E||grad f_i(X*)||)
//
// all constants taken at rank 3r. The expected error after t+1 iterations
// is bounded by kappa^{t+1} ||X^0 - X*|| + sigma.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "stotiht/random.hpp"
#include "stotiht/sensing.hpp"
#include "stotiht/solvers.hpp"
#include "stotiht/tensor.hpp"

namespace stotiht {

namespace detail {

inline void require_delta(double delta) {
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("TRIP constant must lie in [0, 1), got " + std::to_string(delta));
}

}  // namespace detail

inline double rho_plus(double delta) {
  detail::require_delta(delta);
  return 2.0 * (1.0 + delta);
}

inline double rho_minus(double delta) {
  detail::require_delta(delta);
  return 1.0 - delta;
}

/// max_i rho+ / (M p(i)) = rho+ / (M p_min).
inline double alpha(double delta, std::size_t batches, double p_min) {
  if (batches == 0) throw std::invalid_argument("alpha: batch count must be >= 1");
  if (!(p_min > 0.0)) throw std::invalid_argument("alpha: p_min must be > 0");
  return rho_plus(delta) / (static_cast<double>(batches) * p_min);
}

struct TheoryParams {
  double delta_3r = 0.0;
  double eta = 1.0;
  double mu = 1.0;
  std::size_t batches = 1;
  double p_min = 1.0;

  void validate() const {
    detail::require_delta(delta_3r);
    if (!(eta >= 1.0)) throw std::invalid_argument("TheoryParams: eta must be >= 1");
    if (!(mu > 0.0)) throw std::invalid_argument("TheoryParams: mu must be > 0");
    if (batches == 0) throw std::invalid_argument("TheoryParams: batch count must be >= 1");
    // p_min can never exceed the uniform value 1/M.
    if (!(p_min > 0.0) || p_min > 1.0 / static_cast<double>(batches) + 1e-12)
      throw std::invalid_argument("TheoryParams: p_min must lie in (0, 1/M]");
  }
};

/// Contraction coefficient; nullopt when a radicand is negative (the
/// parameters are outside the convergence result's regime).
inline std::optional<double> kappa(const TheoryParams& tp) {
  tp.validate();
  const double rp = rho_plus(tp.delta_3r);
  const double rm = rho_minus(tp.delta_3r);
  const double a = alpha(tp.delta_3r, tp.batches, tp.p_min);
  const double first = 1.0 - (2.0 - tp.mu * a) * tp.mu * rm;
  const double second = 1.0 + tp.mu * tp.mu * a * rp - 2.0 * tp.mu * rm;
  const double eta_term = tp.eta * tp.eta - 1.0;
  if (first < 0.0) return std::nullopt;
  if (eta_term > 0.0 && second < 0.0) return std::nullopt;
  double k = 2.0 * std::sqrt(first);
  if (eta_term > 0.0) k += std::sqrt(eta_term) * std::sqrt(second);
  return k;
}

/// Monte-Carlo estimate of sigma. The projection onto the run-dependent
/// subspace U^t is replaced by its bound ||P_U Z|| <= ||Z||, so this is an
/// over-estimate. Exactly zero when y = A(x_star).
inline double sigma_estimate(const SensingOperator& op, const BatchPartition& part, const Vector& y,
                             const DenseTensor& x_star, double mu, double eta, std::size_t trials,
                             std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("sigma_estimate: trials must be >= 1");
  if (!(eta >= 1.0)) throw std::invalid_argument("sigma_estimate: eta must be >= 1");
  Rng rng(seed);
  double mean_norm = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t i = sample_batch(part, rng);
    mean_norm += frobenius_norm(grad_batch(op, part, i, y, x_star));
  }
  mean_norm /= static_cast<double>(trials);
  const double prefactor = mu / (static_cast<double>(part.count()) * part.min_probability());
  return prefactor * (2.0 + std::sqrt(eta * eta - 1.0)) * mean_norm;
}

enum class EtaMethod { sqrt_2d_minus_3, sqrt_2d_minus_2, two_plus_sqrt2_sqrt_d };

/// Worst-case quasi-optimality constants of HOSVD-type truncations.
inline double eta_hosvd(std::size_t d, EtaMethod method = EtaMethod::sqrt_2d_minus_3) {
  if (d < 2) throw std::invalid_argument("eta_hosvd: order must be >= 2");
  const double dd = static_cast<double>(d);
  switch (method) {
    case EtaMethod::sqrt_2d_minus_3: return std::sqrt(2.0 * dd - 3.0);
    case EtaMethod::sqrt_2d_minus_2: return std::sqrt(2.0 * dd - 2.0);
    case EtaMethod::two_plus_sqrt2_sqrt_d: return (2.0 + std::sqrt(2.0)) * std::sqrt(dd);
  }
  throw std::invalid_argument("eta_hosvd: unknown method");
}

struct BoundCheck {
  double threshold = 0.0;  // C delta^-2 (r^d + d n r)
  bool full_ok = false;    // m >= threshold
  bool batch_ok = false;   // b >= threshold
};

/// Gaussian sample-complexity condition for the TRIP. The constant C is
/// unknown in general and is supplied by the caller (one C for both bounds).
/// nullopt when delta = 0 (the bound is infinite).
inline std::optional<BoundCheck> sample_bound_check(std::size_t m, std::size_t b, double delta, std::size_t n_max,
                                                    std::size_t r_max, std::size_t d, double c = 1.0) {
  if (m == 0 || b == 0 || n_max == 0 || r_max == 0 || d == 0 || !(c > 0.0))
    throw std::invalid_argument("sample_bound_check: all arguments must be positive");
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("sample_bound_check: delta must lie in [0, 1]");
  if (delta == 0.0) return std::nullopt;
  const double r = static_cast<double>(r_max);
  const double threshold =
      c / (delta * delta) * (std::pow(r, static_cast<double>(d)) + static_cast<double>(d) * static_cast<double>(n_max) * r);
  return BoundCheck{threshold, static_cast<double>(m) >= threshold, static_cast<double>(b) >= threshold};
}

}  // namespace stotiht
