#pragma once

// Segment type, RMS / SNR arithmetic, EOG contamination and z-score
// normalization.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eegclean/errors.hpp"

namespace eegclean {

inline constexpr std::size_t kDefaultSegmentLength = 512;
inline constexpr double kDefaultSampleRate = 256.0;

enum class SegmentKind : std::uint8_t { CleanEEG = 0, EOG = 1, Contaminated = 2, Denoised = 3 };

inline std::string_view to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::CleanEEG: return "CleanEEG";
    case SegmentKind::EOG: return "EOG";
    case SegmentKind::Contaminated: return "Contaminated";
    case SegmentKind::Denoised: return "Denoised";
  }
  return "?";
}

struct Segment {
  std::vector<double> samples;
  double sample_rate = kDefaultSampleRate;
  SegmentKind kind = SegmentKind::CleanEEG;

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// Signal-to-noise ratio in decibels.
struct SnrDb {
  double value = 0.0;
  friend bool operator==(const SnrDb&, const SnrDb&) = default;
};

struct MixRecord {
  double lambda = 0.0;
  SnrDb snr;
  std::uint32_t eeg_id = 0;
  std::uint32_t eog_id = 0;
};

struct NormStats {
  double mean = 0.0;
  double std = 1.0;
  bool clamped = false;  // std was below kStdFloor and has been replaced by it
};

inline constexpr double kStdFloor = 1e-12;

inline void validate(const Segment& s) {
  if (s.samples.empty()) throw InvalidSegmentError("segment is empty");
  if (!(s.sample_rate > 0.0) || !std::isfinite(s.sample_rate))
    throw InvalidSegmentError("segment sample rate must be positive");
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    if (!std::isfinite(s.samples[i]))
      throw InvalidSegmentError("segment sample " + std::to_string(i) + " is not finite");
  }
}

inline double rms(std::span<const double> x) {
  if (x.empty()) throw InvalidSegmentError("rms of empty segment");
  double acc = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidSegmentError("rms of non-finite segment");
    acc += v * v;
  }
  return std::sqrt(acc / static_cast<double>(x.size()));
}

inline double rms(const Segment& s) { return rms(std::span<const double>(s.samples)); }

// SNR = 10 log10(rms(eeg) / rms(noise)); note the ratio of RMS values, not
// powers, inside the log.
inline SnrDb measure_snr(const Segment& eeg, const Segment& scaled_eog) {
  const double r_eeg = rms(eeg);
  const double r_eog = rms(scaled_eog);
  if (r_eeg == 0.0 || r_eog == 0.0) throw DegenerateSignalError("measure_snr: zero-RMS input");
  return SnrDb{10.0 * std::log10(r_eeg / r_eog)};
}

inline double lambda_for_snr(const Segment& eeg, const Segment& eog, SnrDb target) {
  if (!std::isfinite(target.value)) throw ConfigError("target SNR must be finite");
  const double r_eeg = rms(eeg);
  const double r_eog = rms(eog);
  if (r_eeg == 0.0 || r_eog == 0.0) throw DegenerateSignalError("lambda_for_snr: zero-RMS input");
  return r_eeg / (r_eog * std::pow(10.0, target.value / 10.0));
}

inline Segment scaled(const Segment& s, double factor) {
  Segment out = s;
  for (double& v : out.samples) v *= factor;
  return out;
}

// noisy = eeg + lambda * eog, for an externally chosen lambda.
inline Segment mix(const Segment& eeg, const Segment& eog, double lambda) {
  validate(eeg);
  validate(eog);
  if (eeg.size() != eog.size())
    throw ShapeError("contaminate: length mismatch (" + std::to_string(eeg.size()) + " vs " +
                     std::to_string(eog.size()) + ")");
  if (eeg.sample_rate != eog.sample_rate) throw ShapeError("contaminate: sample-rate mismatch");
  Segment out;
  out.sample_rate = eeg.sample_rate;
  out.kind = SegmentKind::Contaminated;
  out.samples.resize(eeg.size());
  for (std::size_t i = 0; i < eeg.size(); ++i) out.samples[i] = eeg.samples[i] + lambda * eog.samples[i];
  return out;
}

struct Contamination {
  Segment noisy;
  MixRecord mix;
};

inline Contamination contaminate(const Segment& eeg, const Segment& eog, SnrDb target,
                                 std::uint32_t eeg_id = 0, std::uint32_t eog_id = 0) {
  validate(eeg);
  validate(eog);
  if (eeg.size() != eog.size() || eeg.sample_rate != eog.sample_rate)
    throw ShapeError("contaminate: segments differ in length or sample rate");
  const double lambda = lambda_for_snr(eeg, eog, target);
  return {mix(eeg, eog, lambda), MixRecord{lambda, target, eeg_id, eog_id}};
}

// Population mean/std normalization. A segment whose std is below kStdFloor
// is treated as constant: its output is all zeros and the stats carry the
// clamped std.
inline std::pair<Segment, NormStats> zscore(const Segment& s) {
  validate(s);
  const double n = static_cast<double>(s.size());
  const double mean = std::accumulate(s.samples.begin(), s.samples.end(), 0.0) / n;
  double var = 0.0;
  for (double v : s.samples) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / n);
  NormStats stats{mean, sd, false};
  Segment out = s;
  if (sd < kStdFloor) {
    stats.std = kStdFloor;
    stats.clamped = true;
    std::fill(out.samples.begin(), out.samples.end(), 0.0);
    return {out, stats};
  }
  for (double& v : out.samples) v = (v - mean) / sd;
  return {out, stats};
}

inline Segment denorm(const Segment& s, const NormStats& stats) {
  Segment out = s;
  for (double& v : out.samples) v = v * stats.std + stats.mean;
  return out;
}

}  // namespace eegclean
