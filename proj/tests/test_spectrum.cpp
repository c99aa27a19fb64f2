#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "aec/spectrum.hpp"

using namespace aec;

namespace {

Frame random_block(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Frame x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

// O(M^2) reference transform.
Spectrum naive_dft(const Frame& x) {
  const std::size_t m = x.size();
  Spectrum out(m);
  for (std::size_t k = 0; k < m; ++k) {
    Complex acc{};
    for (std::size_t n = 0; n < m; ++n) {
      const double a = -2.0 * std::numbers::pi * double(k * n % m) / double(m);
      acc += x[n] * Complex(std::cos(a), std::sin(a));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

TEST(Spectrum, ImpulseGivesFlatSpectrum) {
  Frame x(8, 0.0);
  x[0] = 1.0;
  for (const auto& bin : forward_transform(x)) {
    EXPECT_DOUBLE_EQ(bin.real(), 1.0);
    EXPECT_DOUBLE_EQ(bin.imag(), 0.0);
  }
}

TEST(Spectrum, ZeroBlockAndZeroSpectrum) {
  for (const auto& bin : forward_transform(Frame(16, 0.0))) EXPECT_EQ(bin, Complex{});
  for (double v : inverse_transform(Spectrum(16))) EXPECT_EQ(v, 0.0);
}

TEST(Spectrum, FlatSpectrumInvertsToImpulse) {
  const Frame x = inverse_transform(Spectrum(8, Complex(1.0, 0.0)));
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  for (std::size_t i = 1; i < x.size(); ++i) EXPECT_NEAR(x[i], 0.0, 1e-15);
}

TEST(Spectrum, MatchesDirectDft) {
  const Frame x = random_block(64, 3);
  const Spectrum fast = forward_transform(x);
  const Spectrum slow = naive_dft(x);
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_LT(std::abs(fast[k] - slow[k]), 1e-11);
}

TEST(Spectrum, RoundTrip) {
  const Frame x = random_block(64, 11);
  const Frame back = inverse_transform(forward_transform(x));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
}

TEST(Spectrum, Parseval) {
  const Frame x = random_block(64, 12);
  const double time_energy = energy(x);
  const double freq_energy = sum(power(forward_transform(x))) / 64.0;
  EXPECT_NEAR(freq_energy / time_energy, 1.0, 1e-10);
}

TEST(Spectrum, Linearity) {
  const Frame a = random_block(32, 1), b = random_block(32, 2);
  Frame mix(32);
  for (std::size_t i = 0; i < 32; ++i) mix[i] = 2.5 * a[i] - 0.75 * b[i];
  const Spectrum fa = forward_transform(a), fb = forward_transform(b), fm = forward_transform(mix);
  for (std::size_t k = 0; k < 32; ++k) EXPECT_LT(std::abs(fm[k] - (2.5 * fa[k] - 0.75 * fb[k])), 1e-12);
}

TEST(Spectrum, PowerOfBin) {
  EXPECT_DOUBLE_EQ(power(Spectrum{Complex(3, 4)})[0], 25.0);
  for (double p : power(Spectrum(4))) EXPECT_EQ(p, 0.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Spectrum s(64);
  double norm2 = 0.0;
  for (auto& c : s) {
    c = Complex(g(rng), g(rng));
    norm2 += c.real() * c.real() + c.imag() * c.imag();
  }
  EXPECT_NEAR(sum(power(s)), norm2, 1e-12 * norm2);
}

TEST(Spectrum, RejectsBadSizes) {
  EXPECT_THROW(forward_transform(Frame(12, 0.0)), ConfigError);
  EXPECT_THROW(forward_transform(Frame{}), ConfigError);
  EXPECT_THROW(Fft(6), ConfigError);
  const Fft f(8);
  EXPECT_THROW(f.forward(Frame(4, 0.0)), ConfigError);
}

TEST(Spectrum, RejectsNonHermitianInverse) {
  Spectrum s(8);
  s[1] = Complex(0.0, 1.0);
  EXPECT_THROW(inverse_transform(s), NumericError);
}

TEST(Spectrum, SinglePrecisionPlan) {
  const BasicFft<float> f(16);
  std::vector<float> x(16, 0.0f);
  x[3] = 1.0f;
  const auto back = f.inverse_real(f.forward(x));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-6f);
}
