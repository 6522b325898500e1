#pragma once

// Rectangular-window STFT with arbitrary hop and its overlap-add inverse.
//
// Coefficient (k, m) = sum_{n<L} x[m*hop + n] exp(-i 2 pi k n / L), one-sided
// (k = 0..L/2). With a rectangular window the transform satisfies
//
//   sum_m sum_k c_k |X(k, m)|^2 = L * sum_n count[n] x[n]^2
//
// where c_k = 1 for the DC and Nyquist bins and 2 otherwise, and count[n] is
// the number of frames covering sample n.

#include <vector>

#include "eegclean/fft.hpp"
#include "eegclean/signal.hpp"
#include "eegclean/tfa/types.hpp"

namespace eegclean::tfa {

struct StftParams {
  std::size_t window_len = 128;
  std::size_t hop = 1;
};

inline std::size_t stft_frame_count(std::size_t n, const StftParams& p) {
  return (n - p.window_len) / p.hop + 1;
}

inline TfCoefficients stft(const Segment& segment, const StftParams& params = {}) {
  validate(segment);
  const std::size_t L = params.window_len;
  if (L < 2 || L % 2 != 0) throw ConfigError("stft: window length must be even and >= 2");
  if (params.hop == 0 || params.hop > L) throw ConfigError("stft: hop must be in [1, window_len]");
  const std::size_t n = segment.size();
  if (n < L)
    throw ShapeError("stft: segment of " + std::to_string(n) + " samples is shorter than the " +
                     std::to_string(L) + "-sample window");

  const std::size_t frames = stft_frame_count(n, params);
  const std::size_t bins = L / 2 + 1;
  TfCoefficients out;
  out.values.resize(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(frames));
  out.transform_tag = TransformTag::STFT;
  out.source_length = n;
  out.sample_rate = segment.sample_rate;
  out.hop = params.hop;
  out.bin_axis.resize(bins);
  for (std::size_t k = 0; k < bins; ++k)
    out.bin_axis[k] = static_cast<double>(k) * segment.sample_rate / static_cast<double>(L);
  out.frame_axis.resize(frames);

  std::vector<fft::cplx> frame(L);
  for (std::size_t m = 0; m < frames; ++m) {
    const std::size_t start = m * params.hop;
    out.frame_axis[m] = static_cast<double>(start);
    for (std::size_t i = 0; i < L; ++i) frame[i] = segment.samples[start + i];
    auto spec = fft::forward(std::span<const fft::cplx>(frame));
    for (std::size_t k = 0; k < bins; ++k) out.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = spec[k];
  }
  return out;
}

// Overlap-add inverse. Each frame is inverted as a real signal (imaginary
// parts of the DC and Nyquist bins are ignored) and every output sample is
// divided by the number of frames covering it; samples covered by no frame
// come back as zero.
inline Segment istft(const TfCoefficients& coeffs) {
  if (coeffs.transform_tag != TransformTag::STFT) throw ConfigError("istft: coefficients are not STFT");
  coeffs.check_axes();
  const std::size_t bins = coeffs.bins();
  if (bins < 2) throw ShapeError("istft: need at least two bins");
  const std::size_t L = 2 * (bins - 1);
  const std::size_t n = coeffs.source_length;
  const std::size_t hop = coeffs.hop;
  if (hop == 0 || n < L || coeffs.frames() != stft_frame_count(n, {L, hop}))
    throw ShapeError("istft: frame count inconsistent with source length, window and hop");

  Segment out;
  out.sample_rate = coeffs.sample_rate > 0 ? coeffs.sample_rate : kDefaultSampleRate;
  out.kind = SegmentKind::Denoised;
  out.samples.assign(n, 0.0);
  std::vector<double> count(n, 0.0);
  std::vector<fft::cplx> full(L);
  for (std::size_t m = 0; m < coeffs.frames(); ++m) {
    const auto col = static_cast<Eigen::Index>(m);
    for (std::size_t k = 0; k < bins; ++k) full[k] = coeffs.values(static_cast<Eigen::Index>(k), col);
    for (std::size_t k = 1; k < bins - 1; ++k) full[L - k] = std::conj(full[k]);
    auto frame = fft::inverse(std::span<const fft::cplx>(full));
    const std::size_t start = m * hop;
    for (std::size_t i = 0; i < L; ++i) {
      out.samples[start + i] += frame[i].real();
      count[start + i] += 1.0;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (count[i] > 0) out.samples[i] /= count[i];
  return out;
}

}  // namespace eegclean::tfa
