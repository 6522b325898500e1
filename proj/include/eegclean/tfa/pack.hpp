#pragma once

// Conversion between complex coefficients and the real feature matrices the
// network consumes.

#include "eegclean/signal.hpp"
#include "eegclean/tfa/types.hpp"

namespace eegclean::tfa {

inline FeatureSequence pack(const Segment& segment) {
  validate(segment);
  FeatureSequence seq;
  seq.packing = Packing::RawSignal;
  seq.values = Eigen::Map<const Eigen::RowVectorXd>(segment.samples.data(),
                                                    static_cast<Eigen::Index>(segment.size()));
  return seq;
}

// RealImagStacked: real rows on top of imaginary rows (2*bins features).
// RealOnly: real rows only; unpack takes the imaginary part from a template.
inline FeatureSequence pack(const TfCoefficients& coeffs, Packing mode) {
  if (!coeffs.values.allFinite()) throw ShapeError("pack: coefficients contain non-finite entries");
  FeatureSequence seq;
  seq.packing = mode;
  const Eigen::Index bins = coeffs.values.rows();
  switch (mode) {
    case Packing::RealImagStacked:
      seq.values.resize(2 * bins, coeffs.values.cols());
      seq.values.topRows(bins) = coeffs.values.real();
      seq.values.bottomRows(bins) = coeffs.values.imag();
      break;
    case Packing::RealOnly:
      seq.values = coeffs.values.real();
      break;
    case Packing::RawSignal:
      throw ConfigError("pack: RawSignal packing applies to segments, not coefficients");
  }
  return seq;
}

inline std::size_t packed_feature_count(std::size_t bins, Packing mode) {
  switch (mode) {
    case Packing::RealImagStacked: return 2 * bins;
    case Packing::RealOnly: return bins;
    case Packing::RawSignal: return 1;
  }
  return 0;
}

// Inverse of pack. The template supplies axes and metadata, and for RealOnly
// also the imaginary part.
inline TfCoefficients unpack(const FeatureSequence& seq, const TfCoefficients& templ) {
  const Eigen::Index bins = templ.values.rows();
  if (seq.values.cols() != templ.values.cols())
    throw ShapeError("unpack: timestep count does not match template frames");
  if (seq.features() != packed_feature_count(static_cast<std::size_t>(bins), seq.packing))
    throw ShapeError("unpack: feature count " + std::to_string(seq.features()) + " does not match packing of " +
                     std::to_string(bins) + " bins");
  TfCoefficients out = templ;
  switch (seq.packing) {
    case Packing::RealImagStacked:
      out.values.real() = seq.values.topRows(bins);
      out.values.imag() = seq.values.bottomRows(bins);
      break;
    case Packing::RealOnly:
      out.values.real() = seq.values;
      break;
    case Packing::RawSignal:
      throw ConfigError("unpack: RawSignal sequences have no coefficient form");
  }
  return out;
}

inline Segment unpack_signal(const FeatureSequence& seq, double sample_rate) {
  if (seq.packing != Packing::RawSignal || seq.features() != 1)
    throw ShapeError("unpack_signal: expects a 1 x N raw sequence");
  Segment s;
  s.sample_rate = sample_rate;
  s.kind = SegmentKind::Denoised;
  s.samples.assign(seq.values.data(), seq.values.data() + seq.values.size());
  return s;
}

}  // namespace eegclean::tfa
