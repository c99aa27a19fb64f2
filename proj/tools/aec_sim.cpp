// Command-line driver: runs the echo canceller on WAV files or seeded
// synthetic scenarios and writes per-frame CSV, output audio and a summary.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "aec/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain acoustic echo canceller simulator"};
  aec::RunConfig cfg;

  std::string mode = "proposed";
  std::string far, near, ir, ir2, out, near_kind = "speech", far_kind = "speech";
  std::size_t frame = 128, partitions = 8;
  double switch_at = 16.0;
  std::uint64_t seed = 0;

  app.add_option("--mode", mode, "proposed or fixed")
      ->check(CLI::IsMember({"proposed", "fixed"}))
      ->capture_default_str();
  app.add_option("--mu", cfg.canceller.fixed_mu, "Rate in fixed mode")->capture_default_str();
  app.add_option("--mu-max", cfg.canceller.adaptation.mu_max, "Rate ceiling")->capture_default_str();
  app.add_option("--mu-init", cfg.canceller.adaptation.mu_init, "Startup rate")
      ->capture_default_str();
  app.add_option("--beta0", cfg.canceller.adaptation.beta0, "Leakage averaging rate")
      ->capture_default_str();
  app.add_option("--gamma", cfg.canceller.adaptation.gamma, "DC rejection factor")
      ->capture_default_str();
  app.add_option("--frame", frame, "Frame size N (power of two)")->capture_default_str();
  app.add_option("--partitions", partitions, "Partition count K")->capture_default_str();
  app.add_option("--rate", cfg.sample_rate, "Sample rate in Hz")->capture_default_str();
  app.add_option("--far", far, "Far-end WAV (mono 16-bit)");
  app.add_option("--near", near, "Near-end WAV (mono 16-bit)");
  app.add_option("--ir", ir, "Echo path (WAV or text taps)");
  app.add_option("--ir2", ir2, "Echo path after the switch");
  app.add_option("--switch-at", switch_at, "Path switch time in seconds (0: none)")
      ->capture_default_str();
  app.add_option("--ratio-db", cfg.ratios_db, "Near-end to echo ratio(s) in dB");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for synthetic sources");
  app.add_option("--duration", cfg.duration_s, "Synthetic duration in seconds")
      ->capture_default_str();
  app.add_option("--out", out, "Output directory");
  app.add_option("--near-kind", near_kind, "Synthetic near end: speech, noise or none")
      ->check(CLI::IsMember({"speech", "noise", "none"}))
      ->capture_default_str();
  app.add_option("--far-kind", far_kind, "Synthetic far end: speech or white")
      ->check(CLI::IsMember({"speech", "white"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : aec::kExitConfig;
  }

  try {
    cfg.canceller.mode = mode == "fixed" ? aec::RateMode::kFixed : aec::RateMode::kProposed;
    cfg.canceller.mdf = aec::MdfConfig::make(frame, partitions);
    if (!far.empty()) cfg.far_path = far;
    if (!near.empty()) cfg.near_path = near;
    if (!ir.empty()) cfg.ir_path = ir;
    if (!ir2.empty()) cfg.ir2_path = ir2;
    if (!out.empty()) cfg.out_dir = out;
    if (*seed_opt) cfg.seed = seed;
    if (switch_at > 0.0) {
      cfg.switch_at_s = switch_at;
    } else {
      cfg.switch_at_s.reset();
    }
    static const std::map<std::string, aec::NearKind> near_kinds{
        {"speech", aec::NearKind::kSpeech},
        {"noise", aec::NearKind::kNoise},
        {"none", aec::NearKind::kNone}};
    cfg.near_kind = near_kinds.at(near_kind);
    cfg.far_kind = far_kind == "white" ? aec::FarKind::kWhite : aec::FarKind::kSpeech;

    const aec::RunReport report = aec::run_scenario(cfg);
    aec::write_summary(report, std::cout);
    for (const auto& run : report.runs) {
      if (!run.ok) {
        std::cerr << "error: run " << aec::detail::run_label(run.ratio_db) << ": " << run.error
                  << '\n';
        return run.exit_code;
      }
    }
    return aec::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return aec::exit_code_for(std::current_exception());
  }
}
