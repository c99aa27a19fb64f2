#pragma once

// Streaming echo canceller: an MDF filter driven either by the adaptive
// per-bin rate controller or by a constant rate, plus the loop that runs it
// over a rendered scenario and collects metrics.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "aec/adaptation.hpp"
#include "aec/mdf.hpp"
#include "aec/metrics.hpp"
#include "aec/scenario.hpp"

namespace aec {

enum class RateMode { kProposed, kFixed };

struct CancellerConfig {
  RateMode mode = RateMode::kProposed;
  double fixed_mu = 0.2;
  MdfConfig mdf = MdfConfig::make(128, 8);
  AdaptationConfig adaptation;
};

struct CancellerFrame {
  FrameResult filtered;
  RateVector rates;
  double leakage = 1.0;  // controller estimate after this frame (1 in fixed mode)
};

class EchoCanceller {
 public:
  explicit EchoCanceller(const CancellerConfig& config)
      : config_(config), filter_(config.mdf) {
    if (config_.mode == RateMode::kProposed) {
      controller_.emplace(filter_.bins(), config_.mdf.filter_length(),
                          config_.adaptation);
    } else if (!(config_.fixed_mu >= 0.0 && config_.fixed_mu <= 1.0)) {
      throw ConfigError("fixed rate must lie in [0, 1]");
    }
  }

  const CancellerConfig& config() const noexcept { return config_; }
  const MdfFilter& filter() const noexcept { return filter_; }
  MdfFilter& filter() noexcept { return filter_; }
  const std::optional<LearningRateController>& controller() const noexcept {
    return controller_;
  }

  CancellerFrame process(std::span<const double> x_frame, std::span<const double> d_frame) {
    CancellerFrame out;
    out.filtered = filter_.filter(x_frame, d_frame);
    if (controller_) {
      out.leakage = controller_->update_leakage(out.filtered.echo_spectrum,
                                                out.filtered.error_spectrum);
      const double far_power = energy(x_frame) / double(x_frame.size());
      out.rates = controller_->compute_rates(out.filtered.echo_spectrum,
                                             out.filtered.error_spectrum, far_power);
    } else {
      out.rates.rates.assign(filter_.bins(), config_.fixed_mu);
    }
    filter_.adapt(out.rates.rates);
    return out;
  }

 private:
  CancellerConfig config_;
  MdfFilter filter_;
  std::optional<LearningRateController> controller_;
};

struct RunOptions {
  metrics::ErleOptions erle;
  double steady_state_skip_s = 2.0;
  double rate_window_s = 0.6;
};

struct RunResult {
  metrics::MetricsReport report;
  Samples output;       // e
  Samples echo_estimate;
};

using FrameObserver = std::function<void(std::size_t frame, const CancellerFrame&,
                                          const EchoCanceller&)>;

/// Streams a rendered scenario through a fresh canceller. A trailing partial
/// frame is dropped.
inline RunResult run_canceller(const RenderedScenario& scene, const CancellerConfig& config,
                               const RunOptions& options = {},
                               const FrameObserver& observer = {}) {
  EchoCanceller canceller(config);
  const std::size_t n = config.mdf.frame_size;
  const std::size_t frames = scene.x.size() / n;
  const std::size_t used = frames * n;

  RunResult out;
  out.output.reserve(used);
  out.echo_estimate.reserve(used);
  auto& records = out.report.frames;
  records.reserve(frames);

  auto mean_square = [](std::span<const double> s) {
    return s.empty() ? 0.0 : energy(s) / double(s.size());
  };

  for (std::size_t f = 0; f < frames; ++f) {
    const std::span<const double> x(scene.x.data() + f * n, n);
    const std::span<const double> d(scene.d.data() + f * n, n);
    const CancellerFrame cf = canceller.process(x, d);
    if (observer) observer(f, cf, canceller);

    out.output.insert(out.output.end(), cf.filtered.error.begin(), cf.filtered.error.end());
    out.echo_estimate.insert(out.echo_estimate.end(), cf.filtered.echo_estimate.begin(),
                             cf.filtered.echo_estimate.end());

    metrics::FrameRecord rec;
    rec.frame = f;
    rec.time_s = double(f * n) / scene.sample_rate;
    rec.mean_rate = metrics::mean(cf.rates.rates);
    rec.leakage = cf.leakage;
    rec.erle_estimate_db = -10.0 * std::log10(cf.leakage);
    rec.startup = cf.rates.startup;
    rec.power_y = mean_square(std::span(scene.y.data() + f * n, n));
    rec.power_v = mean_square(std::span(scene.v.data() + f * n, n));
    rec.power_d = mean_square(d);
    rec.power_e = mean_square(cf.filtered.error);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = scene.y[f * n + i] - cf.filtered.echo_estimate[i];
      residual += r * r;
    }
    rec.power_residual = residual / double(n);
    rec.power_residual_estimate = cf.leakage * mean_square(cf.filtered.echo_estimate);
    records.push_back(rec);
  }

  const std::span<const double> y(scene.y.data(), used);
  const auto erle = metrics::short_term_erle(y, out.echo_estimate, options.erle);
  for (auto& rec : records) {
    const std::size_t w = rec.frame * n / options.erle.window;
    if (w < erle.size()) rec.erle_db = erle[w];
  }
  std::vector<double> rates(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) rates[i] = records[i].mean_rate;
  const auto smoothed = metrics::rate_trace(
      rates, metrics::frames_for_seconds(options.rate_window_s, scene.sample_rate, n));
  for (std::size_t i = 0; i < records.size(); ++i) records[i].smoothed_rate = smoothed[i];

  out.report.steady_state_erle_db = metrics::steady_state_erle(
      y, out.echo_estimate, options.steady_state_skip_s, scene.switch_samples,
      scene.sample_rate, options.erle);
  return out;
}

}  // namespace aec
