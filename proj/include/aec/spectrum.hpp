#pragma once

// Sample blocks, spectra and the radix-2 transform shared by every module.
//
// Convention: the forward transform is unnormalized and the inverse scales
// by 1/M, so sum |x(n)|^2 == (1/M) sum |X(k)|^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "aec/errors.hpp"

namespace aec {

using Complex = std::complex<double>;

/// Real sample block (x, d, e, v, y or y-hat over one frame or a window).
using Frame = std::vector<double>;
/// Full complex transform of a real 2N window.
using Spectrum = std::vector<Complex>;
/// Bin-wise squared magnitudes.
using PowerSpectrum = std::vector<double>;

constexpr bool is_power_of_two(std::size_t n) noexcept {
  return n != 0 && (n & (n - 1)) == 0;
}

/// Precomputed radix-2 decimation-in-time transform of a fixed size.
template <typename T>
class BasicFft {
 public:
  using value_type = T;
  using complex_type = std::complex<T>;

  explicit BasicFft(std::size_t size) : size_(size) {
    if (!is_power_of_two(size)) {
      throw ConfigError("transform size must be a power of two, got " +
                        std::to_string(size));
    }
    twiddles_.resize(size / 2);
    for (std::size_t k = 0; k < size / 2; ++k) {
      const T angle = -T(2) * std::numbers::pi_v<T> * T(k) / T(size);
      twiddles_[k] = complex_type(std::cos(angle), std::sin(angle));
    }
    bitrev_.resize(size);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < size) ++bits;
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) {
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      }
      bitrev_[i] = r;
    }
  }

  std::size_t size() const noexcept { return size_; }

  /// In-place unnormalized transform; `inverse` conjugates the kernel and
  /// applies the 1/M scale.
  void transform(std::span<complex_type> data, bool inverse) const {
    check_length(data.size());
    for (std::size_t i = 0; i < size_; ++i) {
      if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
    }
    for (std::size_t len = 2; len <= size_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = size_ / len;
      for (std::size_t start = 0; start < size_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          complex_type w = twiddles_[j * stride];
          if (inverse) w = std::conj(w);
          const complex_type a = data[start + j];
          const complex_type b = data[start + j + half] * w;
          data[start + j] = a + b;
          data[start + j + half] = a - b;
        }
      }
    }
    if (inverse) {
      const T scale = T(1) / T(size_);
      for (auto& v : data) v *= scale;
    }
  }

  std::vector<complex_type> forward(std::span<const T> block) const {
    check_length(block.size());
    std::vector<complex_type> out(block.begin(), block.end());
    transform(out, false);
    return out;
  }

  /// Real inverse without the Hermitian check (callers that build spectra
  /// from real data).
  std::vector<T> inverse_real(std::span<const complex_type> spec) const {
    check_length(spec.size());
    std::vector<complex_type> tmp(spec.begin(), spec.end());
    transform(tmp, true);
    std::vector<T> out(size_);
    for (std::size_t i = 0; i < size_; ++i) out[i] = tmp[i].real();
    return out;
  }

  /// Real inverse that rejects spectra whose imaginary residue exceeds
  /// `tolerance` relative to the output magnitude.
  std::vector<T> inverse_checked(std::span<const complex_type> spec,
                                 T tolerance = T(1e-9)) const {
    check_length(spec.size());
    std::vector<complex_type> tmp(spec.begin(), spec.end());
    transform(tmp, true);
    T peak_re = 0;
    T peak_im = 0;
    for (const auto& v : tmp) {
      peak_re = std::max(peak_re, std::abs(v.real()));
      peak_im = std::max(peak_im, std::abs(v.imag()));
    }
    if (peak_im > tolerance * std::max(T(1), peak_re)) {
      throw NumericError("spectrum is not Hermitian: imaginary residue " +
                         std::to_string(peak_im));
    }
    std::vector<T> out(size_);
    for (std::size_t i = 0; i < size_; ++i) out[i] = tmp[i].real();
    return out;
  }

 private:
  void check_length(std::size_t n) const {
    if (n != size_) {
      throw ConfigError("transform length mismatch: expected " +
                        std::to_string(size_) + ", got " + std::to_string(n));
    }
  }

  std::size_t size_;
  std::vector<complex_type> twiddles_;
  std::vector<std::size_t> bitrev_;
};

using Fft = BasicFft<double>;

namespace detail {
inline const Fft& cached_plan(std::size_t size) {
  if (!is_power_of_two(size)) {
    throw ConfigError("transform size must be a power of two, got " +
                      std::to_string(size));
  }
  thread_local std::map<std::size_t, Fft> plans;
  auto it = plans.find(size);
  if (it == plans.end()) it = plans.emplace(size, Fft(size)).first;
  return it->second;
}
}  // namespace detail

inline Spectrum forward_transform(std::span<const double> block) {
  return detail::cached_plan(block.size()).forward(block);
}

inline Frame inverse_transform(std::span<const Complex> spec) {
  return detail::cached_plan(spec.size()).inverse_checked(spec);
}

inline PowerSpectrum power(std::span<const Complex> spec) {
  PowerSpectrum out(spec.size());
  std::transform(spec.begin(), spec.end(), out.begin(),
                 [](const Complex& c) { return std::norm(c); });
  return out;
}

inline double sum(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

inline double energy(std::span<const double> block) {
  double s = 0.0;
  for (double v : block) s += v * v;
  return s;
}

}  // namespace aec
