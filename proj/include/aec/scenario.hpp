#pragma once

// Ground-truth echo scenarios: synthetic sources and echo paths, scheduled
// convolution with abrupt path switches, near-end level control and the
// microphone mix d = y + v.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aec/errors.hpp"
#include "aec/spectrum.hpp"

namespace aec {

using Samples = std::vector<double>;

enum class SourceKind { kWhite, kSpeechLike, kTonal };

struct SourceSpec {
  SourceKind kind = SourceKind::kSpeechLike;
  std::uint64_t seed = 1;
  double duration_s = 1.0;
  double sample_rate = 8000.0;
  double rms = 0.1;         // target level (active portions for speech-like)
  double tone_hz = 440.0;   // tonal only
};

/// Seeded, reproducible test signal.
inline Samples synth_source(const SourceSpec& spec) {
  if (!(spec.duration_s > 0.0) || !(spec.sample_rate > 0.0)) {
    throw ArgumentError("source duration and sample rate must be positive");
  }
  const auto length = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate));
  Samples out(length, 0.0);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  switch (spec.kind) {
    case SourceKind::kWhite:
      for (auto& s : out) s = spec.rms * gauss(rng);
      return out;

    case SourceKind::kTonal: {
      const double w = 2.0 * std::numbers::pi * spec.tone_hz / spec.sample_rate;
      const double amp = spec.rms * std::numbers::sqrt2;
      for (std::size_t n = 0; n < length; ++n) out[n] = amp * std::sin(w * double(n));
      return out;
    }

    case SourceKind::kSpeechLike:
      break;
  }

  // Talk spurts of 0.4-1.5 s separated by 0.2-0.6 s of exact silence, so any
  // 2 s stretch contains part of a gap. Within a spurt the excitation is a
  // jittered pulse train at a gliding pitch plus breath noise, shaped by two
  // formant resonators and a spectral tilt, under a syllable-rate envelope
  // with 10 ms raised-cosine ramps at both ends.
  std::uniform_real_distribution<double> spurt_len(0.4, 1.5);
  std::uniform_real_distribution<double> gap_len(0.2, 0.6);
  std::uniform_real_distribution<double> pitch_hz(90.0, 220.0);
  std::uniform_real_distribution<double> glide(-0.25, 0.25);
  std::uniform_real_distribution<double> f1_hz(300.0, 900.0);
  std::uniform_real_distribution<double> f2_hz(900.0, 2500.0);
  std::uniform_real_distribution<double> syllable_hz(3.0, 6.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);

  struct Resonator {
    double a1 = 0.0, a2 = 0.0, y1 = 0.0, y2 = 0.0;
    Resonator(double hz, double radius, double fs) {
      a1 = 2.0 * radius * std::cos(2.0 * std::numbers::pi * hz / fs);
      a2 = -radius * radius;
    }
    double operator()(double in) {
      const double y0 = in + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y0;
      return y0;
    }
  };

  const double fs = spec.sample_rate;
  const auto ramp = std::max<std::size_t>(1, static_cast<std::size_t>(0.01 * fs));
  std::size_t pos = static_cast<std::size_t>(gap_len(rng) * fs * 0.5);
  double active_energy = 0.0;
  std::size_t active_count = 0;
  while (pos < length) {
    const auto spurt = static_cast<std::size_t>(spurt_len(rng) * fs);
    const double f0 = pitch_hz(rng);
    const double f0_glide = glide(rng);
    Resonator formant1(f1_hz(rng), 0.9, fs);
    Resonator formant2(f2_hz(rng), 0.85, fs);
    double tilt = 0.0;
    const double syl = 2.0 * std::numbers::pi * syllable_hz(rng) / fs;
    const double ph = phase(rng);
    double next_pulse = 0.0;
    for (std::size_t i = 0; i < spurt && pos + i < length; ++i) {
      const double progress = double(i) / double(spurt);
      double excitation = 0.15 * gauss(rng);
      if (double(i) >= next_pulse) {
        excitation += 1.0;
        const double period = fs / (f0 * (1.0 + f0_glide * progress));
        next_pulse += period * (1.0 + jitter(rng));
      }
      const double shaped = formant2(formant1(excitation));
      tilt = 0.5 * tilt + shaped;
      double env = std::abs(std::sin(syl * double(i) + ph));
      env = 0.1 + 0.9 * env;
      if (i < ramp) {
        env *= 0.5 - 0.5 * std::cos(std::numbers::pi * double(i) / double(ramp));
      } else if (spurt - i <= ramp) {
        env *= 0.5 - 0.5 * std::cos(std::numbers::pi * double(spurt - i) / double(ramp));
      }
      const double sample = env * tilt;
      out[pos + i] = sample;
      active_energy += sample * sample;
      ++active_count;
    }
    pos += spurt + static_cast<std::size_t>(gap_len(rng) * fs);
  }
  if (active_count > 0 && active_energy > 0.0) {
    const double scale = spec.rms / std::sqrt(active_energy / double(active_count));
    for (auto& s : out) s *= scale;
  }
  return out;
}

/// Exponentially decaying seeded noise with a short bulk delay; the
/// amplitude falls 60 dB over `decay_ms`. Scaled to the requested energy
/// sum h^2.
inline Samples synth_echo_path(std::uint64_t seed, std::size_t taps,
                               double sample_rate = 8000.0, double decay_ms = 100.0,
                               std::size_t delay = 16, double energy = 0.5) {
  if (taps == 0) throw ArgumentError("echo path needs at least one tap");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double tau = decay_ms * 1e-3 * sample_rate / std::log(1000.0);
  Samples h(taps, 0.0);
  double total = 0.0;
  for (std::size_t n = delay; n < taps; ++n) {
    h[n] = gauss(rng) * std::exp(-double(n - delay) / tau);
    total += h[n] * h[n];
  }
  if (total > 0.0) {
    const double scale = std::sqrt(energy / total);
    for (auto& v : h) v *= scale;
  }
  return h;
}

struct PathSegment {
  std::size_t start = 0;  // first sample using this response
  Samples response;
};

using PathSchedule = std::vector<PathSegment>;

inline void validate_schedule(const PathSchedule& schedule) {
  if (schedule.empty()) throw ArgumentError("echo path schedule is empty");
  if (schedule.front().start != 0) {
    throw ArgumentError("echo path schedule must start at sample 0");
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (i > 0 && schedule[i].start <= schedule[i - 1].start) {
      throw ArgumentError("echo path schedule must be strictly increasing");
    }
    for (double v : schedule[i].response) {
      if (!std::isfinite(v)) throw ArgumentError("echo path has non-finite taps");
    }
  }
}

/// y(n) = sum_k h(k) x(n - k) with h switching instantly at each scheduled
/// start; the past input carries over across a switch.
inline Samples convolve_scheduled(std::span<const double> x,
                                  const PathSchedule& schedule) {
  validate_schedule(schedule);
  Samples y(x.size(), 0.0);
  std::size_t seg = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    while (seg + 1 < schedule.size() && schedule[seg + 1].start <= n) ++seg;
    const Samples& h = schedule[seg].response;
    const std::size_t taps = std::min(h.size(), n + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k < taps; ++k) acc += h[k] * x[n - k];
    y[n] = acc;
  }
  return y;
}

inline double sample_variance(std::span<const double> s) {
  if (s.empty()) return 0.0;
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= double(s.size());
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  return var / double(s.size());
}

/// Scales v so that 20 log10(var(v) / var(y)) equals `ratio_db`.
inline Samples scale_to_ratio(std::span<const double> v, std::span<const double> y,
                              double ratio_db) {
  const double var_y = sample_variance(y);
  if (!(var_y > 0.0)) throw ArgumentError("scale_to_ratio: echo has zero power");
  const double var_v = sample_variance(v);
  Samples out(v.begin(), v.end());
  if (!(var_v > 0.0)) return out;
  const double target_var = var_y * std::pow(10.0, ratio_db / 20.0);
  const double gain = std::sqrt(target_var / var_v);
  for (auto& s : out) s *= gain;
  return out;
}

struct Scenario {
  Samples far_end;                // x
  Samples near_end;               // v: near-end speech plus any noise
  PathSchedule schedule;
  std::optional<double> ratio_db; // empty: use v as-is
  double sample_rate = 8000.0;
};

struct RenderedScenario {
  Samples x;
  Samples y;
  Samples v;
  Samples d;
  double sample_rate = 8000.0;
  std::vector<std::size_t> switch_samples;  // starts of schedule entries after the first
};

inline RenderedScenario render(const Scenario& scenario) {
  const std::size_t length = std::max(scenario.far_end.size(), scenario.near_end.size());
  RenderedScenario out;
  out.sample_rate = scenario.sample_rate;
  out.x = scenario.far_end;
  out.x.resize(length, 0.0);
  out.y = convolve_scheduled(out.x, scenario.schedule);
  Samples v = scenario.near_end;
  v.resize(length, 0.0);
  out.v = scenario.ratio_db ? scale_to_ratio(v, out.y, *scenario.ratio_db) : std::move(v);
  out.d.resize(length);
  for (std::size_t n = 0; n < length; ++n) out.d[n] = out.y[n] + out.v[n];
  for (std::size_t i = 1; i < scenario.schedule.size(); ++i) {
    out.switch_samples.push_back(scenario.schedule[i].start);
  }
  return out;
}

}  // namespace aec
