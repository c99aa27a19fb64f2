#pragma once

// End-to-end runs: build a scenario from files or seeded synthesis, stream
// it through a canceller for each requested near-end ratio, and write the
// per-frame CSV, the echo-cancelled output and a sweep summary.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aec/canceller.hpp"
#include "aec/report.hpp"
#include "aec/wav.hpp"

namespace aec {

enum class FarKind { kSpeech, kWhite };
enum class NearKind { kSpeech, kNoise, kNone };

struct RunConfig {
  CancellerConfig canceller;
  double sample_rate = 8000.0;

  // Sources. A path wins over synthesis; synthesis needs a seed.
  std::optional<std::filesystem::path> far_path;
  std::optional<std::filesystem::path> near_path;
  std::optional<std::filesystem::path> ir_path;
  std::optional<std::filesystem::path> ir2_path;
  std::optional<std::uint64_t> seed;
  FarKind far_kind = FarKind::kSpeech;
  NearKind near_kind = NearKind::kSpeech;
  double duration_s = 32.0;
  std::optional<double> switch_at_s = 16.0;  // empty: one path throughout
  std::size_t echo_taps = 1024;

  std::vector<double> ratios_db;  // empty: near end used at its own level
  RunOptions run_options;
  std::optional<std::filesystem::path> out_dir;

  void validate() const {
    canceller.mdf.validate();
    if (canceller.mode == RateMode::kProposed) canceller.adaptation.validate();
    if (!(canceller.fixed_mu >= 0.0 && canceller.fixed_mu <= 1.0)) {
      throw ConfigError("fixed rate must lie in [0, 1]");
    }
    if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be positive");
    if (!(duration_s > 0.0)) throw ConfigError("duration must be positive");
    if (switch_at_s && !(*switch_at_s > 0.0)) {
      throw ConfigError("switch time must be positive");
    }
    const bool synthetic = !far_path || (!near_path && near_kind != NearKind::kNone) ||
                           !ir_path || (switch_at_s && !ir2_path);
    if (synthetic && !seed) throw ConfigError("synthetic sources need --seed");
  }
};

struct RunEntry {
  std::optional<double> ratio_db;
  bool ok = false;
  std::string error;  // reason when !ok
  int exit_code = 0;  // status class of the failure
  metrics::MetricsReport report;
};

struct RunReport {
  std::vector<RunEntry> runs;

  bool all_ok() const {
    for (const auto& r : runs) if (!r.ok) return false;
    return true;
  }
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitFormat = 4;

/// Maps a caught exception to the CLI exit status.
inline int exit_code_for(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const AudioFormatError&) {
    return kExitFormat;
  } catch (const IoError&) {
    return kExitIo;
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const ArgumentError&) {
    return kExitConfig;
  } catch (...) {
    return 1;
  }
}

namespace detail {

inline Samples load_signal(const std::filesystem::path& path, double expected_rate) {
  const Audio audio = read_audio(path);
  if (double(audio.sample_rate) != expected_rate) {
    throw ConfigError(path.string() + ": sample rate " + std::to_string(audio.sample_rate) +
                      " does not match " + format_number(expected_rate));
  }
  return audio.samples;
}

/// Impulse responses come as WAV or as plain text, one tap per token.
inline Samples load_response(const std::filesystem::path& path, double rate) {
  if (path.extension() == ".wav") return load_signal(path, rate);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Samples taps;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      taps.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw AudioFormatError(path.string() + ": bad tap value '" + token + "'");
    }
  }
  if (taps.empty()) throw AudioFormatError(path.string() + ": no taps");
  return taps;
}

inline std::string run_label(const std::optional<double>& ratio) {
  return ratio ? "ratio_" + format_number(*ratio) + "dB" : std::string("run");
}

}  // namespace detail

/// Assembles the scenario shared by every ratio of a sweep.
inline Scenario build_scenario(const RunConfig& config) {
  const double fs = config.sample_rate;
  const std::uint64_t seed = config.seed.value_or(0);
  Scenario sc;
  sc.sample_rate = fs;

  if (config.far_path) {
    sc.far_end = detail::load_signal(*config.far_path, fs);
  } else {
    const auto kind =
        config.far_kind == FarKind::kWhite ? SourceKind::kWhite : SourceKind::kSpeechLike;
    sc.far_end = synth_source({kind, seed, config.duration_s, fs, 0.1});
  }

  if (config.near_path) {
    sc.near_end = detail::load_signal(*config.near_path, fs);
  } else {
    sc.near_end.assign(sc.far_end.size(), 0.0);
    if (config.near_kind == NearKind::kSpeech) {
      sc.near_end = synth_source({SourceKind::kSpeechLike, seed + 1, config.duration_s, fs, 0.1});
    }
    if (config.near_kind != NearKind::kNone) {
      const double level = config.near_kind == NearKind::kSpeech ? 0.002 : 0.001;
      const auto noise = synth_source({SourceKind::kWhite, seed + 2, config.duration_s, fs, level});
      sc.near_end.resize(std::max(sc.near_end.size(), noise.size()), 0.0);
      for (std::size_t i = 0; i < noise.size(); ++i) sc.near_end[i] += noise[i];
    }
  }

  auto response = [&](const std::optional<std::filesystem::path>& path, std::uint64_t s) {
    return path ? detail::load_response(*path, fs) : synth_echo_path(s, config.echo_taps, fs);
  };
  sc.schedule.push_back({0, response(config.ir_path, seed + 3)});
  if (config.switch_at_s) {
    const auto at = static_cast<std::size_t>(std::llround(*config.switch_at_s * fs));
    sc.schedule.push_back({at, response(config.ir2_path, seed + 4)});
  }
  return sc;
}

inline std::map<std::string, std::string> describe(const RunConfig& config) {
  const auto& c = config.canceller;
  std::map<std::string, std::string> out;
  out["mode"] = c.mode == RateMode::kProposed ? "proposed" : "fixed";
  out["mu"] = format_number(c.fixed_mu);
  out["mu_max"] = format_number(c.adaptation.mu_max);
  out["mu_init"] = format_number(c.adaptation.mu_init);
  out["beta0"] = format_number(c.adaptation.beta0);
  out["gamma"] = format_number(c.adaptation.gamma);
  out["frame"] = std::to_string(c.mdf.frame_size);
  out["partitions"] = std::to_string(c.mdf.partitions);
  out["rate"] = format_number(config.sample_rate);
  out["seed"] = config.seed ? std::to_string(*config.seed) : std::string("none");
  return out;
}

inline void write_summary(const RunReport& report, std::ostream& out) {
  out << "ratio_db,steady_state_erle_db,status,reason\n";
  for (const auto& r : report.runs) {
    out << format_number(r.ratio_db) << ',' << format_number(r.report.steady_state_erle_db)
        << ',' << (r.ok ? "ok" : "failed") << ',';
    std::string reason = r.error;
    for (auto& ch : reason) if (ch == ',' || ch == '\n') ch = ' ';
    out << reason << '\n';
  }
}

/// Runs every ratio of the sweep (concurrently; each run owns its canceller)
/// and writes outputs when an output directory is set. Scenario-level errors
/// such as unreadable inputs propagate; per-run failures are recorded.
inline RunReport run_scenario(const RunConfig& config) {
  config.validate();
  const Scenario base = build_scenario(config);

  std::vector<std::optional<double>> ratios;
  for (double r : config.ratios_db) ratios.emplace_back(r);
  if (ratios.empty()) ratios.emplace_back();

  struct Outcome {
    RunEntry entry;
    Samples output;
  };
  std::vector<std::future<Outcome>> jobs;
  for (const auto& ratio : ratios) {
    jobs.push_back(std::async(std::launch::async, [&config, &base, ratio] {
      Outcome o;
      o.entry.ratio_db = ratio;
      try {
        Scenario sc = base;
        sc.ratio_db = ratio;
        const RenderedScenario scene = render(sc);
        RunResult result = run_canceller(scene, config.canceller, config.run_options);
        o.entry.report = std::move(result.report);
        o.output = std::move(result.output);
        o.entry.ok = true;
      } catch (const std::exception& e) {
        o.entry.error = e.what();
        o.entry.exit_code = exit_code_for(std::current_exception());
      }
      o.entry.report.config = describe(config);
      if (ratio) o.entry.report.config["ratio_db"] = format_number(*ratio);
      return o;
    }));
  }

  RunReport report;
  std::vector<Samples> outputs;
  for (auto& job : jobs) {
    Outcome o = job.get();
    report.runs.push_back(std::move(o.entry));
    outputs.push_back(std::move(o.output));
  }

  if (config.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*config.out_dir, ec);
    if (ec) throw IoError("cannot create " + config.out_dir->string() + ": " + ec.message());
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
      const auto& run = report.runs[i];
      if (!run.ok) continue;
      const std::string label = detail::run_label(run.ratio_db);
      write_csv(run.report, *config.out_dir / ("frames_" + label + ".csv"));
      write_audio(*config.out_dir / ("output_" + label + ".wav"), outputs[i],
                  static_cast<std::uint32_t>(std::llround(config.sample_rate)));
    }
    std::ofstream summary(*config.out_dir / "summary.csv", std::ios::binary);
    if (!summary) throw IoError("cannot write summary.csv");
    write_summary(report, summary);
    std::ofstream cfg(*config.out_dir / "config.txt", std::ios::binary);
    if (!cfg) throw IoError("cannot write config.txt");
    for (const auto& [key, value] : describe(config)) cfg << key << '=' << value << '\n';
  }
  return report;
}

}  // namespace aec
