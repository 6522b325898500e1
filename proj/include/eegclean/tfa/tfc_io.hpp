#pragma once

// Debug dump of coefficient matrices:
//   "TFC1" | tag u32 | bins u32 | frames u32 | row-major (re f32, im f32)...
// All integers and floats little-endian.

#include <string>

#include "eegclean/binary_io.hpp"
#include "eegclean/tfa/types.hpp"

namespace eegclean::tfa {

struct TfcDump {
  TransformTag tag = TransformTag::STFT;
  Eigen::MatrixXcf values;
};

inline std::vector<std::uint8_t> encode_tfc(const TfCoefficients& c) {
  io::ByteWriter w;
  w.text("TFC1");
  w.u32(static_cast<std::uint32_t>(c.transform_tag));
  w.u32(static_cast<std::uint32_t>(c.bins()));
  w.u32(static_cast<std::uint32_t>(c.frames()));
  for (Eigen::Index r = 0; r < c.values.rows(); ++r) {
    for (Eigen::Index col = 0; col < c.values.cols(); ++col) {
      w.f32(static_cast<float>(c.values(r, col).real()));
      w.f32(static_cast<float>(c.values(r, col).imag()));
    }
  }
  return w.take();
}

inline TfcDump decode_tfc(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (r.remaining() < 4 || r.text(4, "magic") != "TFC1") throw FormatError("not a TFC1 coefficient dump");
  TfcDump d;
  const auto tag = r.u32("transform tag");
  if (tag > 2) throw FormatError("TFC1: unknown transform tag " + std::to_string(tag));
  d.tag = static_cast<TransformTag>(tag);
  const auto bins = r.u32("bins");
  const auto frames = r.u32("frames");
  const std::uint64_t need = std::uint64_t{bins} * frames * 8;
  if (r.remaining() != need)
    throw FormatError("TFC1: payload holds " + std::to_string(r.remaining()) + " bytes, header implies " +
                      std::to_string(need));
  d.values.resize(bins, frames);
  for (std::uint32_t i = 0; i < bins; ++i)
    for (std::uint32_t j = 0; j < frames; ++j) {
      const float re = r.f32("value");
      const float im = r.f32("value");
      d.values(i, j) = {re, im};
    }
  return d;
}

inline void write_tfc(const std::string& path, const TfCoefficients& c) { io::write_file(path, encode_tfc(c)); }

inline TfcDump read_tfc(const std::string& path) {
  const auto bytes = io::read_file(path);
  return decode_tfc(bytes);
}

}  // namespace eegclean::tfa
