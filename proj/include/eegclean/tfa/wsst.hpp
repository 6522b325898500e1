#pragma once

// Wavelet synchrosqueezed transform.
//
// An analytic-Morlet CWT on a log grid is computed first. For every cell the
// instantaneous frequency
//
//   f(a, b) = Im( d/db W(a, b) / W(a, b) ) / (2 pi)
//
// is estimated (the time derivative is taken in the Fourier domain), and the
// cell's coefficient W(a, b) * dlog(a) is moved to the output bin whose centre
// frequency is nearest f(a, b) on a log axis. Reconstruction is then a plain
// sum over bins scaled by 2 / C_psi, the same constant as the CWT inverse.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "eegclean/fft.hpp"
#include "eegclean/signal.hpp"
#include "eegclean/tfa/cwt.hpp"
#include "eegclean/tfa/types.hpp"
#include "eegclean/tfa/wavelet.hpp"

namespace eegclean::tfa {

inline constexpr std::size_t kWsstBinCount = 512;
inline constexpr double kDefaultGammaRelative = 1e-8;

struct WsstParams {
  std::size_t output_bins = kWsstBinCount;
  // Absolute magnitude threshold for the phase transform; when unset it is
  // kDefaultGammaRelative * max|W|.
  std::optional<double> gamma;
};

// Output frequency axis: `count` log-spaced bins from fs/N to fs/2.
inline std::vector<double> wsst_frequency_bins(std::size_t n, double sample_rate,
                                               std::size_t count = kWsstBinCount) {
  if (count < 2) throw ConfigError("wsst: need at least two output bins");
  const double lo = sample_rate / static_cast<double>(n);
  const double hi = sample_rate / 2.0;
  std::vector<double> f(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) f[k] = lo * std::exp(step * static_cast<double>(k));
  f.back() = hi;
  return f;
}

// Analysis scales for the squeezing CWT: centre frequencies from fs/2 down to
// one octave below fs/N, voices_per_octave per octave.
inline std::vector<double> wsst_analysis_scales(std::size_t n, double sample_rate, const WaveletSpec& spec) {
  spec.validate();
  const double f_hi = sample_rate / 2.0;
  const double f_lo = sample_rate / static_cast<double>(n) / 2.0;
  const auto v = static_cast<double>(spec.voices_per_octave);
  const auto count = static_cast<std::size_t>(std::floor(std::log2(f_hi / f_lo) * v)) + 1;
  std::vector<double> scales(count);
  for (std::size_t j = 0; j < count; ++j)
    scales[j] = frequency_to_scale(spec, f_hi * std::exp2(-static_cast<double>(j) / v));
  return scales;
}

struct PhaseTransform {
  Eigen::MatrixXd frequency_hz;                               // bins x frames
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;   // |W| > gamma
  double gamma = 0.0;
};

// Instantaneous-frequency estimate for every CWT cell. The derivative is
// obtained by transforming each row back to the Fourier domain, multiplying by
// i*w and inverting, which is exact for the periodic FFT-domain CWT.
inline PhaseTransform phase_transform(const TfCoefficients& coeffs, std::optional<double> gamma = std::nullopt) {
  if (coeffs.transform_tag != TransformTag::CWT) throw ConfigError("phase_transform: expects CWT coefficients");
  coeffs.check_axes();
  const std::size_t n = coeffs.frames();
  const double max_abs = coeffs.values.size() ? coeffs.values.cwiseAbs().maxCoeff() : 0.0;
  PhaseTransform out;
  out.gamma = gamma.value_or(kDefaultGammaRelative * max_abs);
  if (gamma && !(*gamma > 0.0)) throw ConfigError("phase_transform: gamma must be positive");
  out.frequency_hz.setZero(coeffs.values.rows(), coeffs.values.cols());
  out.valid.setConstant(coeffs.values.rows(), coeffs.values.cols(), false);

  std::vector<fft::cplx> row(n);
  for (Eigen::Index j = 0; j < coeffs.values.rows(); ++j) {
    bool any = false;
    for (Eigen::Index b = 0; b < coeffs.values.cols(); ++b) {
      row[static_cast<std::size_t>(b)] = coeffs.values(j, b);
      any = any || std::abs(coeffs.values(j, b)) > out.gamma;
    }
    if (!any) continue;
    auto spec = fft::forward(std::span<const fft::cplx>(row));
    for (std::size_t k = 0; k < n; ++k) spec[k] *= fft::cplx(0.0, fft::angular_frequency(k, n, coeffs.sample_rate));
    const auto deriv = fft::inverse(std::span<const fft::cplx>(spec));
    for (Eigen::Index b = 0; b < coeffs.values.cols(); ++b) {
      const fft::cplx w = coeffs.values(j, b);
      if (std::abs(w) <= out.gamma) continue;
      out.frequency_hz(j, b) = (deriv[static_cast<std::size_t>(b)] / w).imag() / kTwoPi;
      out.valid(j, b) = true;
    }
  }
  return out;
}

inline TfCoefficients wsst(const Segment& segment, const WaveletSpec& spec = WaveletSpec::morlet(),
                           const WsstParams& params = {}) {
  validate(segment);
  if (spec.family != WaveletFamily::AnalyticMorlet) throw ConfigError("wsst: requires the analytic Morlet wavelet");
  if (params.gamma && !(*params.gamma > 0.0)) throw ConfigError("wsst: gamma must be positive");
  const std::size_t n = segment.size();
  const auto scales = wsst_analysis_scales(n, segment.sample_rate, spec);
  const auto W = cwt(segment, spec, scales);
  const auto pt = phase_transform(W, params.gamma);
  const double dlog = std::abs(log_scale_step(scales));

  TfCoefficients out;
  out.transform_tag = TransformTag::WSST;
  out.source_length = n;
  out.sample_rate = segment.sample_rate;
  out.wavelet = spec;
  out.bin_axis = wsst_frequency_bins(n, segment.sample_rate, params.output_bins);
  out.frame_axis = W.frame_axis;
  out.values.setZero(static_cast<Eigen::Index>(params.output_bins), static_cast<Eigen::Index>(n));

  const double f0 = out.bin_axis.front();
  const double bin_step = std::log(out.bin_axis[1] / out.bin_axis[0]);
  const auto last = static_cast<double>(params.output_bins - 1);
  // Cells are visited scale-major so the accumulation order is fixed.
  for (Eigen::Index j = 0; j < W.values.rows(); ++j) {
    for (Eigen::Index b = 0; b < W.values.cols(); ++b) {
      if (!pt.valid(j, b)) continue;
      const double f = pt.frequency_hz(j, b);
      if (!(f > 0.0)) continue;
      const double pos = std::round(std::log(f / f0) / bin_step);
      if (pos < 0.0 || pos > last) continue;
      out.values(static_cast<Eigen::Index>(pos), b) += W.values(j, b) * dlog;
    }
  }
  return out;
}

inline Segment iwsst(const TfCoefficients& coeffs) {
  if (coeffs.transform_tag != TransformTag::WSST) throw ConfigError("iwsst: coefficients are not WSST");
  coeffs.check_axes();
  if (!coeffs.wavelet) throw ConfigError("iwsst: coefficients carry no wavelet description");
  if (coeffs.frames() != coeffs.source_length) throw ShapeError("iwsst: frame count must equal source length");
  const double factor = 2.0 / admissibility_constant(*coeffs.wavelet);
  Segment out;
  out.sample_rate = coeffs.sample_rate > 0 ? coeffs.sample_rate : kDefaultSampleRate;
  out.kind = SegmentKind::Denoised;
  const Eigen::VectorXd sum = coeffs.values.real().colwise().sum().transpose();
  out.samples.resize(coeffs.frames());
  for (std::size_t b = 0; b < coeffs.frames(); ++b) out.samples[b] = factor * sum(static_cast<Eigen::Index>(b));
  return out;
}

}  // namespace eegclean::tfa
