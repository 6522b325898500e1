#pragma once

// Surrogate EEG and EOG generators. Every segment is drawn from its own
// substream mix_seed(seed, index), so results do not depend on thread count.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "eegclean/errors.hpp"
#include "eegclean/fft.hpp"
#include "eegclean/parallel.hpp"
#include "eegclean/signal.hpp"

namespace eegclean::dataset {

inline constexpr double kEegBandLow = 1.0;
inline constexpr double kEegBandHigh = 80.0;
inline constexpr double kEogBandLow = 0.3;
inline constexpr double kEogBandHigh = 10.0;

namespace detail {

inline void check_args(std::size_t count, std::size_t length, double rate) {
  if (count == 0 || length == 0 || !(rate > 0.0) || !std::isfinite(rate))
    throw ConfigError("generator arguments must be positive");
}

inline void unit_rms(std::vector<double>& x) {
  double ss = 0.0;
  for (double v : x) ss += v * v;
  const double r = std::sqrt(ss / static_cast<double>(x.size()));
  if (r > 0.0)
    for (double& v : x) v /= r;
}

// Zeroes every FFT bin whose frequency magnitude lies outside [lo, hi].
inline std::vector<double> band_limit(const std::vector<double>& x, double rate, double lo, double hi) {
  auto X = fft::forward(std::span<const double>(x));
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double f = std::abs(fft::angular_frequency(k, n, rate)) / (2.0 * std::numbers::pi);
    if (f < lo || f > hi) X[k] = 0.0;
  }
  auto y = fft::inverse(X);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i].real();
  return out;
}

inline std::vector<double> pink_band(std::mt19937_64& rng, std::size_t n, double rate) {
  std::normal_distribution<double> gauss;
  std::vector<std::complex<double>> X(n, 0.0);
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * rate / static_cast<double>(n);
    const std::complex<double> c(gauss(rng), gauss(rng));
    if (f < kEegBandLow || f > kEegBandHigh) continue;
    const std::complex<double> v = c / std::sqrt(f);  // power ~ 1/f
    X[k] = v;
    if (k != n - k) X[n - k] = std::conj(v);
    else X[k] = v.real();
  }
  auto y = fft::inverse(X);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i].real();
  unit_rms(out);
  return out;
}

inline Segment make_eeg(std::uint64_t stream, std::size_t n, double rate) {
  std::mt19937_64 rng(stream);
  auto x = pink_band(rng, n, rate);
  const double amp = 0.5 + uniform01(rng);
  const double freq = 8.0 + 4.0 * uniform01(rng);
  const double phase = 2.0 * std::numbers::pi * uniform01(rng);
  for (std::size_t i = 0; i < n; ++i)
    x[i] += amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate + phase);
  unit_rms(x);
  return {std::move(x), rate, SegmentKind::CleanEEG};
}

// Gamma-shaped blink: rises to its peak at a quarter of the width, then
// decays over the remainder.
inline double blink_shape(double t, double onset, double width) {
  const double s = (t - onset) / (0.25 * width);
  if (s <= 0.0) return 0.0;
  return s * s * s * std::exp(3.0 * (1.0 - s));
}

inline Segment make_eog(std::uint64_t stream, std::size_t n, double rate) {
  std::mt19937_64 rng(stream);
  const double duration = static_cast<double>(n) / rate;
  const int blinks = 1 + static_cast<int>(rng() % 3);
  std::vector<double> x(n, 0.0);
  for (int b = 0; b < blinks; ++b) {
    const double width = 0.2 + 0.2 * uniform01(rng);
    const double amp = 0.6 + 0.4 * uniform01(rng);
    const double onset = std::max(0.0, duration - width) * uniform01(rng);
    for (std::size_t i = 0; i < n; ++i) x[i] += amp * blink_shape(static_cast<double>(i) / rate, onset, width);
  }
  x = band_limit(x, rate, kEogBandLow, kEogBandHigh);
  unit_rms(x);
  return {std::move(x), rate, SegmentKind::EOG};
}

}  // namespace detail

inline std::vector<Segment> synth_eeg(std::size_t count, std::size_t length, double rate, std::uint64_t seed,
                                      std::size_t threads = 1) {
  detail::check_args(count, length, rate);
  std::vector<Segment> out(count);
  parallel_for(count, threads, [&](std::size_t i) { out[i] = detail::make_eeg(mix_seed(seed, 0xee9, i), length, rate); });
  return out;
}

inline std::vector<Segment> synth_eog(std::size_t count, std::size_t length, double rate, std::uint64_t seed,
                                      std::size_t threads = 1) {
  detail::check_args(count, length, rate);
  std::vector<Segment> out(count);
  parallel_for(count, threads, [&](std::size_t i) { out[i] = detail::make_eog(mix_seed(seed, 0xe06, i), length, rate); });
  return out;
}

}  // namespace eegclean::dataset
