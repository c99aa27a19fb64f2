#pragma once

// Minimal RIFF/WAVE reader and writer for mono 16-bit PCM.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "aec/errors.hpp"

namespace aec {

struct Audio {
  std::vector<double> samples;  // in [-1, 1)
  std::uint32_t sample_rate = 8000;
};

namespace detail {

inline std::uint32_t read_le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

inline std::uint16_t read_le16(const unsigned char* p) {
  return std::uint16_t(p[0] | p[1] << 8);
}

inline void put_le32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void put_le16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace detail

inline Audio read_audio(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw AudioFormatError(name + ": not a RIFF/WAVE file");
  }

  Audio audio;
  bool have_format = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = detail::read_le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw AudioFormatError(name + ": truncated chunk");

    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw AudioFormatError(name + ": short fmt chunk");
      const unsigned char* f = bytes.data() + body;
      const std::uint16_t format = detail::read_le16(f);
      const std::uint16_t channels = detail::read_le16(f + 2);
      audio.sample_rate = detail::read_le32(f + 4);
      const std::uint16_t bits = detail::read_le16(f + 14);
      if (format != 1 || bits != 16) {
        throw AudioFormatError(name + ": only 16-bit PCM is supported");
      }
      if (channels != 1) {
        throw AudioFormatError(name + ": expected 1 channel, found " +
                               std::to_string(channels));
      }
      if (audio.sample_rate == 0) throw AudioFormatError(name + ": zero sample rate");
      have_format = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_format) throw AudioFormatError(name + ": data chunk before fmt chunk");
      const std::size_t count = size / 2;
      audio.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const auto raw = static_cast<std::int16_t>(detail::read_le16(bytes.data() + body + 2 * i));
        audio.samples[i] = double(raw) / 32768.0;
      }
      return audio;
    }
    pos = body + size + (size & 1);
  }
  throw AudioFormatError(name + ": no data chunk");
}

/// Writes 16-bit mono PCM; samples are rounded and clipped to the int16 range.
inline void write_audio(const std::filesystem::path& path, std::span<const double> samples,
                        std::uint32_t sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put_le32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_le32(out, 16);
  detail::put_le16(out, 1);
  detail::put_le16(out, 1);
  detail::put_le32(out, sample_rate);
  detail::put_le32(out, sample_rate * 2);
  detail::put_le16(out, 2);
  detail::put_le16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put_le32(out, data_bytes);
  for (double s : samples) {
    const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    detail::put_le16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
  if (!file) throw IoError("write failed for " + path.string());
}

}  // namespace aec
