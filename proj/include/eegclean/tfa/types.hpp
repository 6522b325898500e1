#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eegclean/errors.hpp"

namespace eegclean::tfa {

enum class TransformTag : std::uint32_t { STFT = 0, CWT = 1, WSST = 2 };

inline std::string_view to_string(TransformTag t) {
  switch (t) {
    case TransformTag::STFT: return "STFT";
    case TransformTag::CWT: return "CWT";
    case TransformTag::WSST: return "WSST";
  }
  return "?";
}

enum class WaveletFamily : std::uint8_t { Bump, AnalyticMorlet };

// Wavelets are defined by their Fourier transform in dimensionless angular
// frequency (rad/s times scale in seconds).
struct WaveletSpec {
  WaveletFamily family = WaveletFamily::Bump;
  int voices_per_octave = 32;
  double omega0 = 6.0;      // analytic Morlet centre
  double bump_mu = 5.0;     // bump centre
  double bump_sigma = 0.6;  // bump half-width

  static WaveletSpec bump(double mu = 5.0, double sigma = 0.6) {
    WaveletSpec s;
    s.family = WaveletFamily::Bump;
    s.bump_mu = mu;
    s.bump_sigma = sigma;
    return s;
  }
  static WaveletSpec morlet(double omega0 = 6.0, int voices_per_octave = 32) {
    WaveletSpec s;
    s.family = WaveletFamily::AnalyticMorlet;
    s.omega0 = omega0;
    s.voices_per_octave = voices_per_octave;
    return s;
  }

  void validate() const {
    if (voices_per_octave <= 0) throw ConfigError("voices_per_octave must be positive");
    if (family == WaveletFamily::Bump) {
      if (!(bump_sigma > 0.0 && bump_sigma < bump_mu))
        throw ConfigError("bump wavelet requires 0 < sigma < mu");
    } else {
      if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw ConfigError("Morlet omega0 must be positive");
    }
  }

  // Angular frequency at which the wavelet's spectrum peaks.
  double peak_omega() const { return family == WaveletFamily::Bump ? bump_mu : omega0; }

  friend bool operator==(const WaveletSpec&, const WaveletSpec&) = default;
};

// Complex time-frequency matrix. Rows are bins, columns are frames.
//
// bin_axis holds centre frequencies in Hz for STFT and WSST and scales in
// seconds for CWT. frame_axis holds the time of each frame in samples (frame
// start for STFT, sample index for CWT/WSST).
struct TfCoefficients {
  Eigen::MatrixXcd values;
  std::vector<double> bin_axis;
  std::vector<double> frame_axis;
  TransformTag transform_tag = TransformTag::STFT;
  std::size_t source_length = 0;
  double sample_rate = 0.0;
  std::size_t hop = 1;                  // STFT only
  std::optional<WaveletSpec> wavelet;   // CWT / WSST

  std::size_t bins() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t frames() const { return static_cast<std::size_t>(values.cols()); }

  void check_axes() const {
    if (bin_axis.size() != bins() || frame_axis.size() != frames())
      throw ShapeError("TfCoefficients: axis lengths do not match matrix dimensions");
  }
};

enum class Packing : std::uint32_t { RawSignal = 0, RealImagStacked = 1, RealOnly = 2 };

inline std::string_view to_string(Packing p) {
  switch (p) {
    case Packing::RawSignal: return "raw";
    case Packing::RealImagStacked: return "real_imag_stacked";
    case Packing::RealOnly: return "real_only";
  }
  return "?";
}

// Real matrix fed to the network, features x timesteps.
struct FeatureSequence {
  Eigen::MatrixXd values;
  Packing packing = Packing::RawSignal;

  std::size_t features() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t timesteps() const { return static_cast<std::size_t>(values.cols()); }
};

}  // namespace eegclean::tfa
