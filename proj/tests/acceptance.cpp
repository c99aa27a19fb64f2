// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "oracles.hpp"

using namespace aec;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;
std::map<int, std::string> lines;  // printed in criterion order at the end

void report(int id, const char* name, bool pass, const std::string& detail) {
  char head[32];
  std::snprintf(head, sizeof head, "[%s] %2d ", pass ? "PASS" : "FAIL", id);
  lines[id] = head + std::string(name) + ": " + detail;
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Rate bounds and startup accounting, accumulated over every proposed run.
struct RateAudit {
  std::size_t runs = 0;
  std::size_t bad_rates = 0;
  std::size_t bad_startup_rates = 0;
  std::size_t inactive_startup_frames = 0;
  std::deque<std::size_t> startup_samples;  // stable addresses

  FrameObserver observer(const CancellerConfig& cfg, const RenderedScenario& scene) {
    ++runs;
    startup_samples.push_back(0);
    std::size_t* count = &startup_samples.back();
    const double mu_max = cfg.adaptation.mu_max;
    const double mu_init = cfg.adaptation.mu_init;
    const double threshold = cfg.adaptation.activity_threshold;
    const std::size_t n = cfg.mdf.frame_size;
    return [this, count, mu_max, mu_init, threshold, n, &scene](
               std::size_t frame, const CancellerFrame& cf, const EchoCanceller&) {
      if (cf.rates.startup) {
        *count += n;
        const double p = energy(std::span(scene.x.data() + frame * n, n)) / double(n);
        if (!(p > threshold)) ++inactive_startup_frames;
        for (double mu : cf.rates.rates) bad_startup_rates += mu != mu_init;
      } else {
        for (double mu : cf.rates.rates) bad_rates += !(mu >= 0.0 && mu <= mu_max);
      }
    };
  }
};

RateAudit audit;

RunResult run(const RenderedScenario& scene, const CancellerConfig& cfg,
              const FrameObserver& extra = {}) {
  if (cfg.mode != RateMode::kProposed) return run_canceller(scene, cfg, {}, extra);
  auto check = audit.observer(cfg, scene);
  return run_canceller(scene, cfg, {}, [&](std::size_t f, const CancellerFrame& cf,
                                           const EchoCanceller& c) {
    check(f, cf, c);
    if (extra) extra(f, cf, c);
  });
}

void criterion_1() {
  const auto t0 = Clock::now();
  const double err = oracle::mdf_convolution_error(100, 1024);
  const double secs = oracle::seconds_since(t0);
  report(1, "convolution oracle", err <= 1e-9 && secs < 1.0,
         fmt("max abs error %.3g", err) + fmt(" over 100 frames, %.2f s", secs));
}

void criterion_2() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::size_t taps : {8u, 32u}) {
    for (double mu : {0.25, 0.5, 1.0}) {
      const auto r = oracle::one_step_ensemble(taps, mu, 1.0, 0.25, 1.0, 100000,
                                               taps * 1000 + std::size_t(mu * 100));
      worst = std::max(worst, r.relative_error());
    }
  }
  const double secs = oracle::seconds_since(t0);
  report(2, "one-step misadjustment ensemble", worst < 0.02 && secs < 30.0,
         fmt("worst relative error %.4f", worst) + fmt(" (limit 0.02), %.1f s", secs));
}

void criterion_3() {
  double worst = 0.0;
  const double lambdas[] = {1e-4, 1e-3, 1e-2, 0.1, 1.0};
  const double noises[] = {1e-3, 1e-2, 0.1, 1.0, 10.0};
  const double powers[] = {0.5, 4.0, 32.0, 128.0};
  std::size_t cases = 0;
  for (double lam : lambdas) {
    for (double nv : noises) {
      for (double p : powers) {
        const std::size_t taps = 16;
        const double num = oracle::numeric_optimal_rate(lam, nv, p, taps);
        worst = std::max(worst, std::abs(num - nlms::optimal_rate(lam, nv, p, taps)));
        ++cases;
      }
    }
  }
  const bool noiseless_one = nlms::optimal_rate(0.5, 0.0, 4.0, 16) == 1.0 &&
                             oracle::numeric_optimal_rate(0.5, 0.0, 4.0, 16) == 1.0;
  report(3, "optimal rate minimizes expected misadjustment", worst <= 1e-9 && noiseless_one,
         fmt("%.0f grid points", double(cases)) + fmt(", worst gap %.3g", worst) +
             (noiseless_one ? ", noiseless optimum is 1" : ", noiseless optimum is not 1"));
}

void criterion_4() {
  const auto t0 = Clock::now();
  const double sim = oracle::fixed_rate_stall(16, 0.5, 1.0, 1.0, 100000, 4);
  const double pred = nlms::stall_misadjustment(1.0, 1.0, 0.5);
  const double secs = oracle::seconds_since(t0);
  const bool pass = sim > pred / 2.0 && sim < pred * 2.0 && secs < 10.0;
  report(4, "stall misadjustment", pass,
         fmt("simulated %.4f", sim) + fmt(" vs predicted %.4f", pred) + fmt(", %.2f s", secs));
}

void criterion_5() {
  const auto known = oracle::leakage_stream(0.25, false, 500, 256, 51);
  LearningRateController a(256, 0);
  for (std::size_t f = 0; f < known.echo.size(); ++f) a.update_leakage(known.echo[f], known.error[f]);
  const double offline = oracle::offline_leakage(known, a.config().gamma);

  const double avg = oracle::independent_leakage_mean(8, 1000, 256, 52);
  const bool pass = std::abs(a.leakage() - 0.25) <= 0.05 && avg < 0.05;
  report(5, "leakage recovery", pass,
         fmt("estimate %.4f", a.leakage()) + fmt(" (offline fit %.4f)", offline) +
             fmt(", independent-stream mean %.4f over 8 seeds", avg));
}

// Criteria 6, 9 and 10 share one double-talk scenario.
void criteria_6_9_10() {
  const auto t0 = Clock::now();
  const RunConfig base = oracle::acceptance_config(NearKind::kSpeech, false);
  const RenderedScenario scene = oracle::render_acceptance(base, 10.0);
  const Samples h = build_scenario(base).schedule.front().response;

  // Normalized misadjustment of the fixed-rate filter, sampled each second.
  std::vector<double> misadj;
  double h_energy = 0.0;
  for (double v : h) h_energy += v * v;
  CancellerConfig fixed = base.canceller;
  fixed.mode = RateMode::kFixed;
  fixed.fixed_mu = 0.2;
  const auto rb = run(scene, fixed, [&](std::size_t f, const CancellerFrame&,
                                        const EchoCanceller& c) {
    if ((f + 1) % 62 != 0) return;
    const auto est = c.filter().equivalent_impulse_response();
    double m = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
      const double t = i < h.size() ? h[i] : 0.0;
      m += (est[i] - t) * (est[i] - t);
    }
    misadj.push_back(m / h_energy);
  });
  const auto rp = run(scene, base.canceller);
  const double secs = oracle::seconds_since(t0);

  const double eb = rb.report.steady_state_erle_db.value_or(NAN);
  const double ep = rp.report.steady_state_erle_db.value_or(NAN);
  // Diverging: the last quarter is worse than the second quarter.
  auto quarter = [&](std::size_t q) {
    const std::size_t len = misadj.size() / 4;
    double s = 0.0;
    for (std::size_t i = q * len; i < (q + 1) * len; ++i) s += misadj[i];
    return s / double(len);
  };
  const bool diverging = quarter(3) > quarter(1);
  const bool baseline_fails = eb < 3.0 || diverging;
  report(6, "double-talk robustness at 10 dB", baseline_fails && ep >= 10.0 && secs < 20.0,
         fmt("fixed 0.2: %.2f dB", eb) + (diverging ? " (misadjustment rising)" : "") +
             fmt(", proposed: %.2f dB", ep) + fmt(", %.1f s", secs));

  std::size_t active = 0, over = 0;
  for (const auto& f : rp.report.frames) {
    if (f.startup || f.power_y <= 1e-6 || f.power_v <= oracle::kDoubleTalkThreshold) continue;
    ++active;
    over += f.power_residual_estimate > 2.0 * f.power_residual;
  }
  const double frac = active ? double(over) / double(active) : 1.0;
  report(9, "residual overestimation guard", frac < 0.10,
         fmt("%.1f%% of ", 100.0 * frac) + fmt("%.0f double-talk frames over by > 3 dB", double(active)));

  const double margin = ep - eb;
  report(10, "comparative margin (substitute for detector comparison)", margin >= 7.0,
         fmt("proposed minus fixed 0.2: %.2f dB (needs 7); detector baselines and perceptual scores not reproduced",
             margin));
}

void criterion_7() {
  const RunConfig base = oracle::acceptance_config(NearKind::kNoise, true);
  const RenderedScenario scene = oracle::render_acceptance(base, std::nullopt);
  const double fs = scene.sample_rate;
  const double switch_s = *base.switch_at_s;
  const std::size_t win = base.run_options.erle.window;

  CancellerConfig slow = base.canceller;
  slow.mode = RateMode::kFixed;
  slow.fixed_mu = 0.05;
  const auto rs = run(scene, slow);
  const auto rp = run(scene, base.canceller);

  std::optional<double> drop;
  for (const auto& f : rp.report.frames) {
    if (f.time_s >= switch_s && f.erle_estimate_db < 3.0) {
      drop = f.time_s - switch_s;
      break;
    }
  }

  auto recover = [&](const RunResult& r, double& pre) {
    const auto trace = metrics::short_term_erle(
        std::span(scene.y.data(), r.echo_estimate.size()), r.echo_estimate);
    pre = oracle::mean_erle_between(trace, win, fs, base.run_options.steady_state_skip_s, switch_s);
    return oracle::recovery_time(trace, win, fs, switch_s, pre - 3.0);
  };
  double pre_p = 0.0, pre_s = 0.0;
  const auto tp = recover(rp, pre_p);
  const auto ts = recover(rs, pre_s);
  const bool a = drop && *drop <= 1.0;
  const bool b = tp && (!ts || *tp < *ts);
  auto show = [](const std::optional<double>& t) {
    return t ? fmt("%.2f s", *t) : std::string("never");
  };
  report(7, "path-change recovery", a && b,
         "estimate below 3 dB after " + show(drop) + " (limit 1 s); regain pre-switch - 3 dB: proposed " +
             show(tp) + fmt(" (pre %.1f dB)", pre_p) + ", fixed 0.05 " + show(ts) +
             fmt(" (pre %.1f dB)", pre_s));
}

void criterion_8() {
  const std::size_t expected = 2 * 8 * 128;
  bool exact = audit.runs > 0;
  for (std::size_t s : audit.startup_samples) exact = exact && s == expected;
  const bool pass = exact && audit.bad_rates == 0 && audit.bad_startup_rates == 0 &&
                    audit.inactive_startup_frames == 0;
  report(8, "rate bounds and startup", pass,
         fmt("%.0f proposed runs", double(audit.runs)) +
             fmt(", %.0f out-of-range rates", double(audit.bad_rates)) +
             fmt(", %.0f startup mismatches", double(audit.bad_startup_rates + audit.inactive_startup_frames)) +
             fmt(", startup length %.0f samples", audit.startup_samples.empty() ? 0.0 : double(audit.startup_samples.front())));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criteria_6_9_10();
  criterion_7();
  criterion_8();
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
