#pragma once

// Per-bin learning rate for the MDF filter.
//
// The optimal rate is roughly residual-echo power over error power. The
// residual is modelled as a frequency-independent leakage eta times the echo
// estimate power, so each bin gets
//
//   mu(k) = min(eta * |Y(k)|^2 / |E(k)|^2, mu_max).
//
// |Y|^2 and |E|^2 are instantaneous (fast reaction to double-talk); eta is a
// slow regression of the DC-rejected error power spectrum on the
// DC-rejected echo power spectrum. A short fixed-rate startup bootstraps the
// filter from zero weights.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "aec/errors.hpp"
#include "aec/spectrum.hpp"

namespace aec {

struct AdaptationConfig {
  double mu_max = 0.5;
  double mu_init = 0.25;
  double gamma = 0.05;              // DC-rejection factor per frame
  double beta0 = 0.008;             // base leakage averaging rate
  double leakage_min = 1e-3;        // clamp floor on eta, -30 dB
  double activity_threshold = 1e-6; // mean far-end power of an active frame
  double error_floor = 1e-10;       // relative floor on |E(k)|^2
  double regression_floor = 1e-20;  // added to sum R_YY

  void validate() const {
    auto in_open_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!(mu_max > 0.0 && mu_max <= 1.0)) {
      throw ConfigError("mu_max must lie in (0, 1]");
    }
    if (!(mu_init >= 0.0 && mu_init <= 1.0)) {
      throw ConfigError("mu_init must lie in [0, 1]");
    }
    if (!in_open_unit(gamma)) throw ConfigError("gamma must lie in (0, 1)");
    if (!in_open_unit(beta0)) throw ConfigError("beta0 must lie in (0, 1)");
    if (!(leakage_min > 0.0 && leakage_min < 1.0)) {
      throw ConfigError("leakage_min must lie in (0, 1)");
    }
    if (!(activity_threshold >= 0.0)) {
      throw ConfigError("activity threshold must be >= 0");
    }
  }
};

struct RateVector {
  std::vector<double> rates;  // mu(k), one per bin
  bool startup = false;       // true when the fixed startup rate was used
};

class LearningRateController {
 public:
  /// `bins` is the spectrum length 2N; the startup period lasts twice the
  /// filter length of active far-end signal.
  LearningRateController(std::size_t bins, std::size_t filter_length,
                         const AdaptationConfig& config = AdaptationConfig{})
      : config_(config),
        bins_(bins),
        startup_remaining_(2 * filter_length),
        dc_echo_(bins, 0.0),
        dc_error_(bins, 0.0),
        prev_echo_power_(bins, 0.0),
        prev_error_power_(bins, 0.0),
        corr_error_echo_(bins, 0.0),
        corr_echo_echo_(bins, 0.0) {
    config_.validate();
    if (bins == 0 || bins % 2 != 0) {
      throw ConfigError("controller needs an even, nonzero bin count");
    }
  }

  const AdaptationConfig& config() const noexcept { return config_; }
  double leakage() const noexcept { return leakage_; }
  std::size_t startup_remaining() const noexcept { return startup_remaining_; }
  bool in_startup() const noexcept { return startup_remaining_ > 0; }
  double last_beta() const noexcept { return last_beta_; }

  /// ERLE implied by the leakage estimate, 10 log10(1 / eta).
  double erle_estimate_db() const noexcept { return -10.0 * std::log10(leakage_); }

  /// `far_end_power` is the mean-square far-end sample value of the frame
  /// and decides whether a startup frame counts as active.
  RateVector compute_rates(std::span<const Complex> echo_spec,
                           std::span<const Complex> error_spec,
                           double far_end_power) {
    check_lengths(echo_spec, error_spec);
    RateVector out;
    out.rates.resize(bins_);

    if (startup_remaining_ > 0 && far_end_power > config_.activity_threshold) {
      std::fill(out.rates.begin(), out.rates.end(), config_.mu_init);
      out.startup = true;
      const std::size_t frame = bins_ / 2;
      startup_remaining_ -= std::min(startup_remaining_, frame);
      return out;
    }

    double mean_error = 0.0;
    for (const auto& e : error_spec) mean_error += std::norm(e);
    mean_error /= double(bins_);
    const double floor = config_.error_floor * mean_error +
                         std::numeric_limits<double>::min();

    for (std::size_t k = 0; k < bins_; ++k) {
      const double ratio =
          leakage_ * std::norm(echo_spec[k]) / (std::norm(error_spec[k]) + floor);
      out.rates[k] = std::min(ratio, config_.mu_max);
    }
    return out;
  }

  /// Advances the regression state by one frame and returns the new eta.
  double update_leakage(std::span<const Complex> echo_spec,
                        std::span<const Complex> error_spec) {
    check_lengths(echo_spec, error_spec);
    const double g = config_.gamma;

    double echo_total = 0.0;
    double error_total = 0.0;
    for (std::size_t k = 0; k < bins_; ++k) {
      const double py = std::norm(echo_spec[k]);
      const double pe = std::norm(error_spec[k]);
      echo_total += py;
      error_total += pe;
      dc_echo_[k] = (1.0 - g) * dc_echo_[k] + g * (py - prev_echo_power_[k]);
      dc_error_[k] = (1.0 - g) * dc_error_[k] + g * (pe - prev_error_power_[k]);
      prev_echo_power_[k] = py;
      prev_error_power_[k] = pe;
    }

    double beta = 0.0;
    if (echo_total > 0.0) {
      const double ratio = error_total > 0.0 ? echo_total / error_total : 1.0;
      beta = config_.beta0 * std::min(ratio, 1.0);
    }
    last_beta_ = beta;
    if (beta == 0.0) return leakage_;

    double sum_ey = 0.0;
    double sum_yy = 0.0;
    for (std::size_t k = 0; k < bins_; ++k) {
      corr_error_echo_[k] =
          (1.0 - beta) * corr_error_echo_[k] + beta * dc_echo_[k] * dc_error_[k];
      corr_echo_echo_[k] =
          (1.0 - beta) * corr_echo_echo_[k] + beta * dc_echo_[k] * dc_echo_[k];
      sum_ey += corr_error_echo_[k];
      sum_yy += corr_echo_echo_[k];
    }
    if (sum_yy > 0.0) {
      const double eta = sum_ey / (sum_yy + config_.regression_floor);
      leakage_ = std::clamp(eta, config_.leakage_min, 1.0);
    }
    return leakage_;
  }

 private:
  void check_lengths(std::span<const Complex> a, std::span<const Complex> b) const {
    if (a.size() != bins_ || b.size() != bins_) {
      throw ArgumentError("controller expects spectra of length " +
                          std::to_string(bins_));
    }
  }

  AdaptationConfig config_;
  std::size_t bins_;
  std::size_t startup_remaining_;
  double leakage_ = 1.0;
  double last_beta_ = 0.0;
  PowerSpectrum dc_echo_;           // P_Y
  PowerSpectrum dc_error_;          // P_E
  PowerSpectrum prev_echo_power_;   // |Y(k, l-1)|^2
  PowerSpectrum prev_error_power_;  // |E(k, l-1)|^2
  std::vector<double> corr_error_echo_;  // R_EY
  std::vector<double> corr_echo_echo_;   // R_YY
};

}  // namespace aec
