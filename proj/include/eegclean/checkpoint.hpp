#pragma once

// Model checkpoint file.
//
//   "BLSTM01"
//   u32 frontend, input_dim, hidden_dim, out_dim, packing
//   14 tensors (hidden_dim > 0 only): u32 rows, u32 cols, rows*cols f64 row-major
//   NormStats: f64 mean, f64 std, u8 clamped
//   TrainConfig: f64 lr, u64 epochs, u64 batch, f64 beta1, beta2, eps, u64 seed, f64 clip_norm
//   u32 scaler length, f64 scale[length], f64 target shift
//   f64 dropout1, f64 dropout2, u8 dropout_per_timestep
//
// All values little-endian. hidden_dim == 0 denotes a pass-through model.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eegclean/binary_io.hpp"
#include "eegclean/errors.hpp"
#include "eegclean/pipeline.hpp"

namespace eegclean {

inline constexpr std::string_view kCheckpointMagic = "BLSTM01";

struct Checkpoint {
  DenoiserModel model;
  NormStats norm;  // pooled statistics of the training inputs
  nn::TrainConfig train_config;
  bool dropout_per_timestep = true;

  std::size_t hidden_dim() const { return model.net ? model.net->hidden_dim() : 0; }
};

inline NormStats pooled_stats(std::span<const Segment> segments) {
  double sum = 0.0, sumsq = 0.0, n = 0.0;
  for (const auto& s : segments)
    for (double v : s.samples) {
      sum += v;
      n += 1.0;
    }
  if (n == 0.0) return {};
  const double mean = sum / n;
  for (const auto& s : segments)
    for (double v : s.samples) sumsq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sumsq / n);
  if (sd < kStdFloor) return {mean, kStdFloor, true};
  return {mean, sd, false};
}

namespace detail {

inline void write_matrix(io::ByteWriter& w, const nn::Matrix& m) {
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
}

inline nn::Matrix read_matrix(io::ByteReader& rd, Eigen::Index rows, Eigen::Index cols, std::size_t index) {
  const auto r = rd.u32("tensor rows");
  const auto c = rd.u32("tensor cols");
  if (r != rows || c != cols)
    throw ShapeError("checkpoint tensor " + std::to_string(index) + " has shape " + std::to_string(r) + "x" +
                     std::to_string(c) + ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  nn::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rd.f64("tensor data");
  if (!m.allFinite()) throw FormatError("checkpoint tensor " + std::to_string(index) + " contains non-finite values");
  return m;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  const auto& m = ck.model;
  check_compatible(m.frontend, m.packing);
  if (m.scaler.dim() != m.feature_dim) throw ShapeError("checkpoint: scaler size differs from feature dimension");
  io::ByteWriter w;
  w.text(kCheckpointMagic);
  w.u32(static_cast<std::uint32_t>(m.frontend));
  w.u32(static_cast<std::uint32_t>(m.feature_dim));
  w.u32(static_cast<std::uint32_t>(ck.hidden_dim()));
  w.u32(static_cast<std::uint32_t>(m.feature_dim));
  w.u32(static_cast<std::uint32_t>(m.packing));
  if (m.net) {
    if (m.net->input_dim() != m.feature_dim || m.net->out_dim() != m.feature_dim)
      throw ShapeError("checkpoint: network dimensions differ from feature dimension");
    for (const nn::Matrix* t : m.net->params.tensors()) detail::write_matrix(w, *t);
  }
  w.f64(ck.norm.mean);
  w.f64(ck.norm.std);
  w.u8(ck.norm.clamped ? 1 : 0);
  const auto& tc = ck.train_config;
  w.f64(tc.learning_rate);
  w.u64(tc.epochs);
  w.u64(tc.batch_size);
  w.f64(tc.adam_beta1);
  w.f64(tc.adam_beta2);
  w.f64(tc.adam_eps);
  w.u64(tc.rng_seed);
  w.f64(tc.clip_norm);
  w.u32(static_cast<std::uint32_t>(m.scaler.dim()));
  for (Eigen::Index i = 0; i < m.scaler.scale.size(); ++i) w.f64(m.scaler.scale(i));
  w.f64(m.scaler.shift);
  w.f64(m.net ? m.net->dropout1 : nn::kDropout1);
  w.f64(m.net ? m.net->dropout2 : nn::kDropout2);
  w.u8(ck.dropout_per_timestep ? 1 : 0);
  return w.take();
}

inline Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  io::ByteReader rd(bytes);
  if (rd.remaining() < kCheckpointMagic.size() || rd.text(kCheckpointMagic.size(), "magic") != kCheckpointMagic)
    throw FormatError("not a checkpoint file (bad magic)");
  const auto frontend_tag = rd.u32("frontend");
  const auto input_dim = rd.u32("input_dim");
  const auto hidden_dim = rd.u32("hidden_dim");
  const auto out_dim = rd.u32("out_dim");
  const auto packing_tag = rd.u32("packing");
  if (frontend_tag > 3) throw FormatError("checkpoint: unknown frontend tag " + std::to_string(frontend_tag));
  if (packing_tag > 2) throw FormatError("checkpoint: unknown packing tag " + std::to_string(packing_tag));

  Checkpoint ck;
  auto& m = ck.model;
  m.frontend = static_cast<Frontend>(frontend_tag);
  m.packing = static_cast<tfa::Packing>(packing_tag);
  try {
    check_compatible(m.frontend, m.packing);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  if (input_dim == 0 || input_dim != out_dim)
    throw ShapeError("checkpoint: input_dim " + std::to_string(input_dim) + " and out_dim " + std::to_string(out_dim) +
                     " must be equal and positive");
  const auto expected = feature_dim(m.frontend, m.packing, kDefaultSegmentLength);
  if (input_dim != expected)
    throw ShapeError("checkpoint: input_dim " + std::to_string(input_dim) + " does not match " +
                     std::string(to_string(m.frontend)) + " features (" + std::to_string(expected) + ")");
  m.feature_dim = input_dim;

  if (hidden_dim > 0) {
    nn::BiLstmNetwork net;
    const Eigen::Index H = hidden_dim, D = input_dim;
    auto& p = net.params;
    p.layer1 = {nn::LstmCellParams::zeros(input_dim, hidden_dim), nn::LstmCellParams::zeros(input_dim, hidden_dim)};
    p.layer2 = {nn::LstmCellParams::zeros(2 * hidden_dim, hidden_dim),
                nn::LstmCellParams::zeros(2 * hidden_dim, hidden_dim)};
    p.fc_w = nn::Matrix::Zero(D, 2 * H);
    p.fc_b = nn::Matrix::Zero(D, 1);
    std::size_t index = 0;
    for (nn::Matrix* t : p.tensors()) {
      *t = detail::read_matrix(rd, t->rows(), t->cols(), index);
      ++index;
    }
    m.net = std::move(net);
  }

  ck.norm.mean = rd.f64("norm mean");
  ck.norm.std = rd.f64("norm std");
  ck.norm.clamped = rd.u8("norm clamped") != 0;
  auto& tc = ck.train_config;
  tc.learning_rate = rd.f64("learning_rate");
  tc.epochs = rd.u64("epochs");
  tc.batch_size = rd.u64("batch_size");
  tc.adam_beta1 = rd.f64("adam_beta1");
  tc.adam_beta2 = rd.f64("adam_beta2");
  tc.adam_eps = rd.f64("adam_eps");
  tc.rng_seed = rd.u64("rng_seed");
  tc.clip_norm = rd.f64("clip_norm");
  const auto scaler_len = rd.u32("scaler length");
  if (scaler_len != input_dim)
    throw ShapeError("checkpoint: scaler length " + std::to_string(scaler_len) + " differs from input_dim");
  m.scaler.scale.resize(scaler_len);
  for (std::uint32_t i = 0; i < scaler_len; ++i) {
    m.scaler.scale(i) = rd.f64("scaler");
    if (!(m.scaler.scale(i) > 0.0) || !std::isfinite(m.scaler.scale(i)))
      throw FormatError("checkpoint: scaler entries must be positive and finite");
  }
  m.scaler.shift = rd.f64("target shift");
  if (!std::isfinite(m.scaler.shift)) throw FormatError("checkpoint: target shift is not finite");
  const double d1 = rd.f64("dropout1");
  const double d2 = rd.f64("dropout2");
  ck.dropout_per_timestep = rd.u8("dropout layout") != 0;
  if (!(d1 >= 0.0 && d1 < 1.0) || !(d2 >= 0.0 && d2 < 1.0)) throw FormatError("checkpoint: dropout rate out of range");
  if (m.net) {
    m.net->dropout1 = d1;
    m.net->dropout2 = d2;
  }
  if (rd.remaining() != 0) throw FormatError("checkpoint: " + std::to_string(rd.remaining()) + " trailing bytes");
  return ck;
}

inline void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  io::write_file(path, encode_checkpoint(ck));
}

inline Checkpoint read_checkpoint(const std::string& path) { return decode_checkpoint(io::read_file(path)); }

inline std::uint64_t checkpoint_hash(const Checkpoint& ck) { return io::fnv1a(encode_checkpoint(ck)); }

}  // namespace eegclean
