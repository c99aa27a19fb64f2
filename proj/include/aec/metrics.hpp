#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aec/errors.hpp"

namespace aec::metrics {

struct ErleOptions {
  std::size_t window = 2048;          // samples, 256 ms at 8 kHz
  double silence_fraction = 1e-8;     // of full-scale energy per window
  double cap_db = 80.0;
};

/// Non-overlapping windows of 10 log10(sum y^2 / sum (y - y_hat)^2). Windows
/// whose echo energy is below threshold have no value; a zero residual is
/// reported as the cap. A trailing partial window is dropped.
inline std::vector<std::optional<double>> short_term_erle(
    std::span<const double> y, std::span<const double> y_hat,
    const ErleOptions& opts = {}) {
  if (y.size() != y_hat.size()) {
    throw ArgumentError("short_term_erle: length mismatch");
  }
  if (opts.window == 0) throw ArgumentError("short_term_erle: window must be > 0");
  const double threshold = opts.silence_fraction * double(opts.window);
  std::vector<std::optional<double>> out;
  for (std::size_t start = 0; start + opts.window <= y.size(); start += opts.window) {
    double echo = 0.0;
    double residual = 0.0;
    for (std::size_t n = start; n < start + opts.window; ++n) {
      echo += y[n] * y[n];
      const double r = y[n] - y_hat[n];
      residual += r * r;
    }
    if (echo <= threshold) {
      out.emplace_back();
    } else if (residual <= 0.0) {
      out.emplace_back(opts.cap_db);
    } else {
      out.emplace_back(std::min(opts.cap_db, 10.0 * std::log10(echo / residual)));
    }
  }
  return out;
}

/// Mean of the defined short-term ERLE values, excluding every window that
/// overlaps the first `skip_s` seconds after the start or after a path
/// switch. Empty when nothing remains.
inline std::optional<double> steady_state_erle(std::span<const double> y,
                                               std::span<const double> y_hat,
                                               double skip_s,
                                               std::span<const std::size_t> switch_samples,
                                               double sample_rate,
                                               const ErleOptions& opts = {}) {
  if (skip_s < 0.0) throw ArgumentError("steady_state_erle: skip must be >= 0");
  const auto trace = short_term_erle(y, y_hat, opts);
  const auto skip = static_cast<std::size_t>(std::llround(skip_s * sample_rate));
  std::vector<std::size_t> origins{0};
  origins.insert(origins.end(), switch_samples.begin(), switch_samples.end());

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t w = 0; w < trace.size(); ++w) {
    if (!trace[w]) continue;
    const std::size_t begin = w * opts.window;
    const std::size_t end = begin + opts.window;
    const bool excluded = std::any_of(origins.begin(), origins.end(), [&](std::size_t o) {
      return skip > 0 && begin < o + skip && end > o;
    });
    if (excluded) continue;
    total += *trace[w];
    ++count;
  }
  if (count == 0) return std::nullopt;
  return total / double(count);
}

/// Centered triangular-weighted moving average spanning `window_frames`
/// frames; an isolated spike spreads into a triangle of that width. Weights
/// are renormalized at the edges.
inline std::vector<double> rate_trace(std::span<const double> frame_rates,
                                      std::size_t window_frames) {
  if (window_frames == 0) throw ArgumentError("rate_trace: window must be > 0");
  const long half = long(window_frames) / 2;
  std::vector<double> weights;
  for (long i = -half; i <= half; ++i) {
    weights.push_back(double(half + 1 - std::labs(i)));
  }
  std::vector<double> out(frame_rates.size(), 0.0);
  const long n = long(frame_rates.size());
  for (long t = 0; t < n; ++t) {
    double acc = 0.0;
    double norm = 0.0;
    for (long i = -half; i <= half; ++i) {
      const long s = t + i;
      if (s < 0 || s >= n) continue;
      const double w = weights[std::size_t(i + half)];
      acc += w * frame_rates[std::size_t(s)];
      norm += w;
    }
    out[std::size_t(t)] = acc / norm;
  }
  return out;
}

inline std::size_t frames_for_seconds(double seconds, double sample_rate,
                                      std::size_t frame_size) {
  if (!(seconds > 0.0)) throw ArgumentError("window must be > 0 seconds");
  const double frames = seconds * sample_rate / double(frame_size);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(frames)));
}

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

struct FrameRecord {
  std::size_t frame = 0;
  double time_s = 0.0;
  std::optional<double> erle_db;  // short-term window containing the frame
  double mean_rate = 0.0;         // mean of mu(k) over bins
  double smoothed_rate = 0.0;     // rate_trace output
  double leakage = 0.0;
  double erle_estimate_db = 0.0;
  bool startup = false;
  double power_y = 0.0;           // mean-square per frame
  double power_v = 0.0;
  double power_d = 0.0;
  double power_e = 0.0;
  double power_residual = 0.0;    // (y - y_hat)
  double power_residual_estimate = 0.0;  // leakage * mean-square y_hat
};

struct MetricsReport {
  std::vector<FrameRecord> frames;
  std::optional<double> steady_state_erle_db;
  std::map<std::string, std::string> config;
};

}  // namespace aec::metrics
