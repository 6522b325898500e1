#pragma once

// FFT-domain continuous wavelet transform and its single-integral inverse.
//
//   W(a, b) = IFFT[ X(w) conj(psi_hat(a w)) ](b)
//
// No sqrt(a) factor is applied (L1 normalization), so a unit sinusoid inside
// the pass band of scale a produces |W| close to psi_hat at that band. The
// signal is treated as periodic.

#include <cmath>
#include <vector>

#include "eegclean/fft.hpp"
#include "eegclean/signal.hpp"
#include "eegclean/tfa/types.hpp"
#include "eegclean/tfa/wavelet.hpp"

namespace eegclean::tfa {

inline constexpr std::size_t kCwtScaleCount = 94;

// Log-spaced scales from 2 sample periods to N/4 sample periods, `count`
// points including both ends.
inline std::vector<double> cwt_default_scales(std::size_t n, double sample_rate,
                                              std::size_t count = kCwtScaleCount) {
  if (count < 2) throw ConfigError("cwt: need at least two scales");
  if (n < 16) throw ShapeError("cwt: default scale grid needs at least 16 samples");
  const double lo = 2.0 / sample_rate;
  const double hi = static_cast<double>(n) / (4.0 * sample_rate);
  std::vector<double> scales(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t j = 0; j < count; ++j) scales[j] = lo * std::exp(step * static_cast<double>(j));
  scales.back() = hi;
  return scales;
}

// Spacing of a log-uniform scale grid; throws if the grid is not log-uniform.
inline double log_scale_step(const std::vector<double>& scales) {
  if (scales.size() < 2) throw ShapeError("scale grid needs at least two entries");
  const double step = std::log(scales[1] / scales[0]);
  for (std::size_t j = 2; j < scales.size(); ++j) {
    if (std::abs(std::log(scales[j] / scales[j - 1]) - step) > 1e-9 * std::abs(step))
      throw ShapeError("scale grid is not log-uniform");
  }
  return step;
}

inline TfCoefficients cwt(const Segment& segment, const WaveletSpec& spec, const std::vector<double>& scales) {
  validate(segment);
  spec.validate();
  if (scales.empty()) throw ConfigError("cwt: empty scale grid");
  for (double a : scales)
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("cwt: scales must be positive");

  const std::size_t n = segment.size();
  const auto X = fft::forward(std::span<const double>(segment.samples));
  TfCoefficients out;
  out.values.resize(static_cast<Eigen::Index>(scales.size()), static_cast<Eigen::Index>(n));
  out.transform_tag = TransformTag::CWT;
  out.source_length = n;
  out.sample_rate = segment.sample_rate;
  out.wavelet = spec;
  out.bin_axis = scales;
  out.frame_axis.resize(n);
  for (std::size_t b = 0; b < n; ++b) out.frame_axis[b] = static_cast<double>(b);

  std::vector<fft::cplx> prod(n);
  for (std::size_t j = 0; j < scales.size(); ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const double w = fft::angular_frequency(k, n, segment.sample_rate);
      prod[k] = X[k] * wavelet_fourier(spec, scales[j] * w);
    }
    const auto row = fft::inverse(std::span<const fft::cplx>(prod));
    for (std::size_t b = 0; b < n; ++b) out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b)) = row[b];
  }
  return out;
}

// Default frontend transform: bump wavelet on the 94-scale grid.
inline TfCoefficients cwt(const Segment& segment, const WaveletSpec& spec = WaveletSpec::bump()) {
  validate(segment);
  return cwt(segment, spec, cwt_default_scales(segment.size(), segment.sample_rate));
}

// x(b) = (2 / C) * dlog(a) * sum_j Re W(a_j, b). Only the real part of the
// coefficients is used; content outside the covered band (including DC) is
// not recovered.
inline Segment icwt(const TfCoefficients& coeffs) {
  if (coeffs.transform_tag != TransformTag::CWT) throw ConfigError("icwt: coefficients are not CWT");
  coeffs.check_axes();
  if (!coeffs.wavelet) throw ConfigError("icwt: coefficients carry no wavelet description");
  if (coeffs.frames() != coeffs.source_length) throw ShapeError("icwt: frame count must equal source length");
  const double dlog = log_scale_step(coeffs.bin_axis);
  const double factor = 2.0 * std::abs(dlog) / admissibility_constant(*coeffs.wavelet);

  Segment out;
  out.sample_rate = coeffs.sample_rate > 0 ? coeffs.sample_rate : kDefaultSampleRate;
  out.kind = SegmentKind::Denoised;
  const Eigen::VectorXd sum = coeffs.values.real().colwise().sum().transpose();
  out.samples.resize(coeffs.frames());
  for (std::size_t b = 0; b < coeffs.frames(); ++b) out.samples[b] = factor * sum(static_cast<Eigen::Index>(b));
  return out;
}

}  // namespace eegclean::tfa
