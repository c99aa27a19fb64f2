#pragma once

// Complex time-domain NLMS filter and the closed-form step-size theory that
// goes with it: expected one-step misadjustment under white excitation, the
// conditional optimal rate, the stall point and the residual-echo floor.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aec/errors.hpp"
#include "aec/spectrum.hpp"

namespace aec::nlms {

class NlmsState {
 public:
  NlmsState(std::size_t taps, double mu)
      : weights_(taps, Complex{}), history_(taps, Complex{}) {
    if (taps == 0) throw ConfigError("NLMS filter needs at least one tap");
    set_rate(mu);
  }

  std::size_t taps() const noexcept { return weights_.size(); }
  double rate() const noexcept { return mu_; }
  void set_rate(double mu) {
    if (!(mu >= 0.0 && mu <= 1.0)) {
      throw ArgumentError("NLMS rate must lie in [0, 1]");
    }
    mu_ = mu;
  }

  std::span<const Complex> weights() const noexcept { return weights_; }
  std::span<Complex> weights() noexcept { return weights_; }
  /// history()[k] == x(n - k) for the most recent sample n.
  std::span<const Complex> history() const noexcept { return history_; }

  /// sum_i |x(n - i)|^2 over the current window.
  double window_power() const noexcept {
    double p = 0.0;
    for (const auto& v : history_) p += std::norm(v);
    return p;
  }

  /// Pushes x(n), filters and adapts; returns e(n) = d(n) - y_hat(n).
  Complex step(Complex x_new, Complex d) {
    std::rotate(history_.rbegin(), history_.rbegin() + 1, history_.rend());
    history_.front() = x_new;

    Complex y_hat{};
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      y_hat += weights_[k] * history_[k];
    }
    const Complex e = d - y_hat;

    const double norm = window_power() + kRegularizer * double(taps());
    const Complex gain = mu_ * e / norm;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      weights_[k] += gain * std::conj(history_[k]);
    }
    return e;
  }

  static constexpr double kRegularizer = 1e-12;

 private:
  std::vector<Complex> weights_;
  std::vector<Complex> history_;
  double mu_ = 0.0;
};

/// Sum of |w_hat_k - w_k|^2.
inline double misadjustment(std::span<const Complex> estimate,
                            std::span<const Complex> truth) {
  if (estimate.size() != truth.size()) {
    throw ArgumentError("misadjustment: length mismatch (" +
                        std::to_string(estimate.size()) + " vs " +
                        std::to_string(truth.size()) + ")");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < estimate.size(); ++k) {
    total += std::norm(estimate[k] - truth[k]);
  }
  return total;
}

/// Rate minimizing the expected next misadjustment given the current
/// misadjustment, near-end variance and input window energy.
inline double optimal_rate(double misadj, double noise_var, double window_power,
                           std::size_t taps) {
  if (misadj < 0.0 || noise_var < 0.0 || window_power < 0.0) {
    throw ArgumentError("optimal_rate: inputs must be nonnegative");
  }
  if (taps == 0) throw ArgumentError("optimal_rate: taps must be positive");
  if (noise_var == 0.0) return 1.0;
  const double residual = misadj * window_power / double(taps);
  if (residual == 0.0) return 0.0;
  return 1.0 / (1.0 + noise_var / residual);
}

/// E{Lambda(n+1) | Lambda(n), x} for white, mutually uncorrelated x and v.
inline double expected_misadjustment(double misadj, double mu, std::size_t taps,
                                     double noise_var, double window_power) {
  if (window_power <= 0.0) {
    throw ArgumentError("expected_misadjustment: window power must be > 0");
  }
  if (misadj < 0.0 || taps == 0) {
    throw ArgumentError("expected_misadjustment: invalid misadjustment or taps");
  }
  const double n = double(taps);
  // Expanded so Lambda == 0 needs no special 0 * inf handling.
  return misadj * (1.0 - 2.0 * mu / n + mu * mu / n) +
         mu * mu * noise_var / window_power;
}

/// Misadjustment at which a fixed-rate filter stops improving on average.
inline double stall_misadjustment(double noise_var, double input_var, double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) {
    throw ArgumentError("stall_misadjustment: rate must lie in (0, 1]");
  }
  if (!(input_var > 0.0)) {
    throw ArgumentError("stall_misadjustment: input variance must be > 0");
  }
  return noise_var / (input_var * (2.0 / mu - 1.0));
}

/// Residual echo left when adaptation stalls with the rate set from an
/// estimated residual: bounded by half the estimate and by the noise.
inline double residual_floor(double estimated_residual, double noise_var) {
  return std::min(0.5 * estimated_residual, noise_var);
}

}  // namespace aec::nlms
