#pragma once

// Multidelay block frequency-domain adaptive filter (overlap-save, 50%
// frame advance, K partitions of N taps each, per-bin normalized update).

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aec/errors.hpp"
#include "aec/spectrum.hpp"

namespace aec {

struct MdfConfig {
  std::size_t frame_size = 128;  // N
  std::size_t partitions = 8;    // K, filter length K * N
  double regularizer = 8e-6;     // epsilon in the normalizer
  double power_smoothing = 0.1;  // alpha_P

  static MdfConfig make(std::size_t frame_size, std::size_t partitions) {
    MdfConfig c;
    c.frame_size = frame_size;
    c.partitions = partitions;
    c.regularizer = 1e-6 * double(partitions);
    return c;
  }

  std::size_t window_size() const noexcept { return 2 * frame_size; }
  std::size_t filter_length() const noexcept { return frame_size * partitions; }

  void validate() const {
    if (!is_power_of_two(frame_size)) {
      throw ConfigError("frame size must be a power of two, got " +
                        std::to_string(frame_size));
    }
    if (partitions == 0) throw ConfigError("partition count must be >= 1");
    if (!(regularizer > 0.0)) throw ConfigError("regularizer must be > 0");
    if (!(power_smoothing > 0.0 && power_smoothing < 1.0)) {
      throw ConfigError("power smoothing must lie in (0, 1)");
    }
  }
};

struct FrameResult {
  Frame error;              // e = d - y_hat
  Frame echo_estimate;      // y_hat
  Spectrum echo_spectrum;   // transform of [0...0 | y_hat]
  Spectrum error_spectrum;  // transform of [0...0 | e]
};

/// Projects a partition onto the set of spectra whose time-domain image is
/// zero in its second half.
inline void apply_gradient_constraint(Spectrum& partition, const Fft& fft) {
  Frame taps = fft.inverse_real(partition);
  std::fill(taps.begin() + std::ptrdiff_t(taps.size() / 2), taps.end(), 0.0);
  partition = fft.forward(taps);
}

inline Spectrum apply_gradient_constraint(const Spectrum& partition) {
  Spectrum out = partition;
  apply_gradient_constraint(out, detail::cached_plan(partition.size()));
  return out;
}

class MdfFilter {
 public:
  explicit MdfFilter(const MdfConfig& config = MdfConfig{})
      : config_(validated(config)),
        fft_(config_.window_size()),
        weights_(config_.partitions, Spectrum(config_.window_size())),
        history_(config_.partitions, Spectrum(config_.window_size())),
        input_power_(config_.window_size(), 0.0),
        previous_input_(config_.frame_size, 0.0) {}

  const MdfConfig& config() const noexcept { return config_; }
  std::size_t frame_size() const noexcept { return config_.frame_size; }
  std::size_t bins() const noexcept { return config_.window_size(); }
  std::size_t frames_processed() const noexcept { return frame_count_; }

  std::span<const Spectrum> weights() const noexcept { return weights_; }
  std::span<const Spectrum> input_history() const noexcept { return history_; }
  const PowerSpectrum& input_power() const noexcept { return input_power_; }

  /// Filters one frame and adapts with per-bin rates (length 2N, each in
  /// [0, 1]).
  FrameResult process(std::span<const double> x_frame,
                      std::span<const double> d_frame,
                      std::span<const double> rates) {
    check_rates(rates);
    FrameResult result = filter(x_frame, d_frame);
    adapt(rates);
    return result;
  }

  /// First half of process(): pushes the input window, computes the echo
  /// estimate and error, and refreshes the normalizer. Rates that depend on
  /// this frame's spectra are then passed to adapt().
  FrameResult filter(std::span<const double> x_frame,
                     std::span<const double> d_frame) {
    const std::size_t n = config_.frame_size;
    const std::size_t m = config_.window_size();
    const std::size_t parts = config_.partitions;
    if (x_frame.size() != n || d_frame.size() != n) {
      throw ArgumentError("MDF frames must have length " + std::to_string(n));
    }

    Frame window(m);
    std::copy(previous_input_.begin(), previous_input_.end(), window.begin());
    std::copy(x_frame.begin(), x_frame.end(), window.begin() + std::ptrdiff_t(n));
    std::copy(x_frame.begin(), x_frame.end(), previous_input_.begin());
    std::rotate(history_.rbegin(), history_.rbegin() + 1, history_.rend());
    history_.front() = fft_.forward(window);

    Spectrum filtered(m);
    for (std::size_t j = 0; j < parts; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        filtered[k] += weights_[j][k] * history_[j][k];
      }
    }
    const Frame circular = fft_.inverse_real(filtered);

    FrameResult result;
    result.echo_estimate.assign(circular.begin() + std::ptrdiff_t(n), circular.end());
    result.error.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      result.error[i] = d_frame[i] - result.echo_estimate[i];
    }
    result.echo_spectrum = padded_transform(result.echo_estimate);
    result.error_spectrum = padded_transform(result.error);

    for (std::size_t k = 0; k < m; ++k) {
      double total = 0.0;
      for (std::size_t j = 0; j < parts; ++j) total += std::norm(history_[j][k]);
      input_power_[k] = (1.0 - config_.power_smoothing) * input_power_[k] +
                        config_.power_smoothing * total / double(parts);
    }

    last_error_spectrum_ = result.error_spectrum;
    ++frame_count_;
    return result;
  }

  /// Second half of process(): weight update from the last filtered frame.
  void adapt(std::span<const double> rates) {
    check_rates(rates);
    if (frame_count_ == 0) {
      throw ArgumentError("adapt() called before any frame was filtered");
    }
    update_weights(last_error_spectrum_, rates);
  }

  /// Loads a time-domain response of at most K * N taps.
  void load_impulse_response(std::span<const double> response) {
    const std::size_t n = config_.frame_size;
    if (response.size() > config_.filter_length()) {
      throw ArgumentError("impulse response has " +
                          std::to_string(response.size()) +
                          " taps, filter holds " +
                          std::to_string(config_.filter_length()));
    }
    for (std::size_t j = 0; j < config_.partitions; ++j) {
      Frame block(config_.window_size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t t = j * n + i;
        if (t < response.size()) block[i] = response[t];
      }
      weights_[j] = fft_.forward(block);
    }
  }

  /// Time-domain taps represented by the weights, length K * N.
  Frame equivalent_impulse_response() const {
    const std::size_t n = config_.frame_size;
    Frame out;
    out.reserve(config_.filter_length());
    for (const auto& w : weights_) {
      const Frame taps = fft_.inverse_real(w);
      out.insert(out.end(), taps.begin(), taps.begin() + std::ptrdiff_t(n));
    }
    return out;
  }

 private:
  static MdfConfig validated(const MdfConfig& c) {
    c.validate();
    return c;
  }

  void check_rates(std::span<const double> rates) const {
    if (rates.size() != config_.window_size()) {
      throw ArgumentError("MDF rate vector must have length " +
                          std::to_string(config_.window_size()));
    }
    for (double r : rates) {
      if (!(r >= 0.0 && r <= 1.0)) {
        throw ArgumentError("MDF rates must lie in [0, 1]");
      }
    }
  }

  Spectrum padded_transform(std::span<const double> block) const {
    Frame padded(config_.window_size(), 0.0);
    std::copy(block.begin(), block.end(),
              padded.begin() + std::ptrdiff_t(config_.frame_size));
    return fft_.forward(padded);
  }

  // The gradient is projected instead of the weights; since weights start
  // (and stay) constrained this is the same projection, and a zero gradient
  // leaves the weights bit-identical.
  void update_weights(const Spectrum& error_spec, std::span<const double> rates) {
    const std::size_t m = config_.window_size();
    const double parts = double(config_.partitions);
    Spectrum step(m);
    for (std::size_t k = 0; k < m; ++k) {
      double total = 0.0;
      for (std::size_t j = 0; j < config_.partitions; ++j) total += std::norm(history_[j][k]);
      const double normalizer = std::max(parts * input_power_[k], total);
      step[k] = rates[k] * error_spec[k] / (normalizer + config_.regularizer);
    }
    for (std::size_t j = 0; j < config_.partitions; ++j) {
      Spectrum gradient(m);
      bool nonzero = false;
      for (std::size_t k = 0; k < m; ++k) {
        gradient[k] = step[k] * std::conj(history_[j][k]);
        nonzero = nonzero || gradient[k] != Complex{};
      }
      if (!nonzero) continue;
      apply_gradient_constraint(gradient, fft_);
      for (std::size_t k = 0; k < m; ++k) weights_[j][k] += gradient[k];
    }
  }

  MdfConfig config_;
  Fft fft_;
  std::vector<Spectrum> weights_;
  std::vector<Spectrum> history_;  // history_[j] == X(k, l - j)
  PowerSpectrum input_power_;
  Frame previous_input_;
  Spectrum last_error_spectrum_;
  std::size_t frame_count_ = 0;
};

}  // namespace aec
