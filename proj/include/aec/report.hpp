#pragma once

// CSV output for per-frame metrics and sweep summaries. Numbers use
// std::to_chars (shortest round-trip form), so files do not depend on the
// C locale and identical runs give identical bytes.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>

#include "aec/errors.hpp"
#include "aec/metrics.hpp"

namespace aec {

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) throw NumericError("number formatting failed");
  return std::string(buf, res.ptr);
}

inline std::string format_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string{};
}

inline constexpr const char* kFrameCsvHeader =
    "frame,time_s,erle_db,mean_rate,smoothed_rate,leakage,erle_estimate_db,startup,"
    "power_y,power_v,power_d,power_e,power_residual,power_residual_estimate";

inline void write_csv(const metrics::MetricsReport& report, std::ostream& out) {
  out << kFrameCsvHeader << '\n';
  for (const auto& r : report.frames) {
    out << r.frame << ',' << format_number(r.time_s) << ',' << format_number(r.erle_db) << ','
        << format_number(r.mean_rate) << ',' << format_number(r.smoothed_rate) << ','
        << format_number(r.leakage) << ',' << format_number(r.erle_estimate_db) << ','
        << (r.startup ? 1 : 0) << ',' << format_number(r.power_y) << ','
        << format_number(r.power_v) << ',' << format_number(r.power_d) << ','
        << format_number(r.power_e) << ',' << format_number(r.power_residual) << ','
        << format_number(r.power_residual_estimate) << '\n';
  }
}

inline void write_csv(const metrics::MetricsReport& report,
                      const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write " + path.string());
  write_csv(report, file);
  if (!file) throw IoError("write failed for " + path.string());
}

}  // namespace aec
