#pragma once

// Seven-layer BiLSTM regression network:
//   input -> BiLSTM -> dropout(0.30) -> BiLSTM -> dropout(0.20) -> FC + ReLU -> MSE
//
// Sequences are Eigen matrices laid out features x timesteps. Gate blocks in
// W, U and b are stacked in the order input, forget, cell, output.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "eegclean/errors.hpp"
#include "eegclean/parallel.hpp"

namespace eegclean::nn {

using Matrix = Eigen::MatrixXd;

struct LstmCellParams {
  Matrix W;  // 4H x input
  Matrix U;  // 4H x H
  Matrix b;  // 4H x 1

  std::size_t input_dim() const { return static_cast<std::size_t>(W.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(U.cols()); }

  static LstmCellParams zeros(std::size_t input, std::size_t hidden) {
    const auto h = static_cast<Eigen::Index>(hidden);
    return {Matrix::Zero(4 * h, static_cast<Eigen::Index>(input)), Matrix::Zero(4 * h, h), Matrix::Zero(4 * h, 1)};
  }
};

struct BiLstmLayer {
  LstmCellParams forward;
  LstmCellParams backward;
};

// Every trainable tensor of the network. Also used as the gradient and Adam
// moment container.
struct NetworkParams {
  BiLstmLayer layer1;
  BiLstmLayer layer2;
  Matrix fc_w;  // out x 2H
  Matrix fc_b;  // out x 1

  static constexpr std::size_t kTensorCount = 14;

  std::array<Matrix*, kTensorCount> tensors() {
    return {&layer1.forward.W, &layer1.forward.U, &layer1.forward.b, &layer1.backward.W, &layer1.backward.U,
            &layer1.backward.b, &layer2.forward.W, &layer2.forward.U, &layer2.forward.b, &layer2.backward.W,
            &layer2.backward.U, &layer2.backward.b, &fc_w, &fc_b};
  }
  std::array<const Matrix*, kTensorCount> tensors() const {
    auto t = const_cast<NetworkParams*>(this)->tensors();
    std::array<const Matrix*, kTensorCount> out;
    for (std::size_t i = 0; i < kTensorCount; ++i) out[i] = t[i];
    return out;
  }

  NetworkParams zeros_like() const {
    NetworkParams z = *this;
    for (Matrix* m : z.tensors()) m->setZero();
    return z;
  }

  bool same_shape(const NetworkParams& o) const {
    auto a = tensors();
    auto b = o.tensors();
    for (std::size_t i = 0; i < kTensorCount; ++i)
      if (a[i]->rows() != b[i]->rows() || a[i]->cols() != b[i]->cols()) return false;
    return true;
  }

  double squared_norm() const {
    double s = 0.0;
    for (const Matrix* m : tensors()) s += m->squaredNorm();
    return s;
  }
};

inline constexpr double kDropout1 = 0.30;
inline constexpr double kDropout2 = 0.20;

struct BiLstmNetwork {
  NetworkParams params;
  double dropout1 = kDropout1;
  double dropout2 = kDropout2;
  // Incremented on every parameter update so stale forward caches are caught.
  std::uint64_t version = 0;

  std::size_t input_dim() const { return params.layer1.forward.input_dim(); }
  std::size_t hidden_dim() const { return params.layer1.forward.hidden_dim(); }
  std::size_t out_dim() const { return static_cast<std::size_t>(params.fc_w.rows()); }

  Matrix predict(const Matrix& x) const;
};

// Glorot-uniform weights, zero biases except the forget gate (1.0).
inline BiLstmNetwork init_network(std::size_t input_dim, std::size_t hidden_dim, std::size_t out_dim,
                                  std::uint64_t seed) {
  if (input_dim == 0 || hidden_dim == 0 || out_dim == 0)
    throw ConfigError("init_network: dimensions must be positive");
  std::mt19937_64 rng(seed);
  auto glorot = [&rng](Matrix& m, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = limit * (2.0 * uniform01(rng) - 1.0);
  };
  const auto H = static_cast<Eigen::Index>(hidden_dim);
  auto make_cell = [&](std::size_t in) {
    auto cell = LstmCellParams::zeros(in, hidden_dim);
    glorot(cell.W, static_cast<double>(in), 4.0 * hidden_dim);
    glorot(cell.U, static_cast<double>(hidden_dim), 4.0 * hidden_dim);
    cell.b.block(H, 0, H, 1).setOnes();
    return cell;
  };
  BiLstmNetwork net;
  net.params.layer1 = {make_cell(input_dim), make_cell(input_dim)};
  net.params.layer2 = {make_cell(2 * hidden_dim), make_cell(2 * hidden_dim)};
  net.params.fc_w.resize(static_cast<Eigen::Index>(out_dim), 2 * H);
  glorot(net.params.fc_w, 2.0 * hidden_dim, static_cast<double>(out_dim));
  net.params.fc_b = Matrix::Zero(static_cast<Eigen::Index>(out_dim), 1);
  return net;
}

struct ForwardMode {
  bool train = false;
  std::uint64_t seed = 0;

  static ForwardMode Train(std::uint64_t seed) { return {true, seed}; }
  static ForwardMode Infer() { return {false, 0}; }
};

namespace detail {

// Activated gates (4H x T), cell state and hidden state (H x T), indexed by
// original time even for the reverse direction.
struct DirectionCache {
  Matrix gates;
  Matrix c;
  Matrix h;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline DirectionCache run_direction(const LstmCellParams& p, const Matrix& x, bool reverse) {
  const Eigen::Index H = static_cast<Eigen::Index>(p.hidden_dim());
  const Eigen::Index T = x.cols();
  Matrix zx = p.W * x;
  zx.colwise() += p.b.col(0);
  DirectionCache out{Matrix(4 * H, T), Matrix(H, T), Matrix(H, T)};
  Eigen::VectorXd h = Eigen::VectorXd::Zero(H), c = Eigen::VectorXd::Zero(H), z(4 * H);
  for (Eigen::Index s = 0; s < T; ++s) {
    const Eigen::Index t = reverse ? T - 1 - s : s;
    z.noalias() = zx.col(t);
    z.noalias() += p.U * h;
    auto gates = out.gates.col(t);
    for (Eigen::Index k = 0; k < H; ++k) {
      const double i = sigmoid(z(k));
      const double f = sigmoid(z(H + k));
      const double g = std::tanh(z(2 * H + k));
      const double o = sigmoid(z(3 * H + k));
      gates(k) = i;
      gates(H + k) = f;
      gates(2 * H + k) = g;
      gates(3 * H + k) = o;
      c(k) = f * c(k) + i * g;
      h(k) = o * std::tanh(c(k));
    }
    out.c.col(t) = c;
    out.h.col(t) = h;
  }
  return out;
}

// Backpropagation through time for one direction. Accumulates parameter
// gradients into `grad` and the input gradient into `dx`.
inline void backprop_direction(const LstmCellParams& p, const Matrix& x, const DirectionCache& cache, const Matrix& dH,
                               bool reverse, LstmCellParams& grad, Matrix& dx) {
  const Eigen::Index H = static_cast<Eigen::Index>(p.hidden_dim());
  const Eigen::Index T = x.cols();
  Matrix dZ(4 * H, T);
  Matrix h_prev = Matrix::Zero(H, T);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H), dc_next = Eigen::VectorXd::Zero(H), dz(4 * H);
  for (Eigen::Index s = T - 1; s >= 0; --s) {
    const Eigen::Index t = reverse ? T - 1 - s : s;
    const bool has_prev = s > 0;
    const Eigen::Index tp = reverse ? t + 1 : t - 1;
    auto gates = cache.gates.col(t);
    for (Eigen::Index k = 0; k < H; ++k) {
      const double i = gates(k), f = gates(H + k), g = gates(2 * H + k), o = gates(3 * H + k);
      const double tc = std::tanh(cache.c(k, t));
      const double c_prev = has_prev ? cache.c(k, tp) : 0.0;
      const double dh = dH(k, t) + dh_next(k);
      const double dc = dh * o * (1.0 - tc * tc) + dc_next(k);
      dz(k) = dc * g * i * (1.0 - i);
      dz(H + k) = dc * c_prev * f * (1.0 - f);
      dz(2 * H + k) = dc * i * (1.0 - g * g);
      dz(3 * H + k) = dh * tc * o * (1.0 - o);
      dc_next(k) = dc * f;
    }
    dZ.col(t) = dz;
    dh_next.noalias() = p.U.transpose() * dz;
    if (has_prev) h_prev.col(t) = cache.h.col(tp);
  }
  grad.W.noalias() += dZ * x.transpose();
  grad.U.noalias() += dZ * h_prev.transpose();
  grad.b.noalias() += dZ.rowwise().sum();
  dx.noalias() += p.W.transpose() * dZ;
}

inline Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::uint64_t seed) {
  Matrix m(rows, cols);
  if (rate <= 0.0) {
    m.setOnes();
    return m;
  }
  std::mt19937_64 rng(seed);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = uniform01(rng) < rate ? 0.0 : keep_scale;
  return m;
}

struct LayerCache {
  Matrix input;
  DirectionCache fwd;
  DirectionCache bwd;
};

inline Matrix run_layer(const BiLstmLayer& layer, const Matrix& x, LayerCache& cache) {
  cache.input = x;
  cache.fwd = run_direction(layer.forward, x, false);
  cache.bwd = run_direction(layer.backward, x, true);
  const Eigen::Index H = cache.fwd.h.rows();
  Matrix y(2 * H, x.cols());
  y.topRows(H) = cache.fwd.h;
  y.bottomRows(H) = cache.bwd.h;
  return y;
}

inline Matrix backprop_layer(const BiLstmLayer& layer, const LayerCache& cache, const Matrix& dY, BiLstmLayer& grad) {
  const Eigen::Index H = cache.fwd.h.rows();
  Matrix dx = Matrix::Zero(cache.input.rows(), cache.input.cols());
  backprop_direction(layer.forward, cache.input, cache.fwd, dY.topRows(H), false, grad.forward, dx);
  backprop_direction(layer.backward, cache.input, cache.bwd, dY.bottomRows(H), true, grad.backward, dx);
  return dx;
}

}  // namespace detail

// Activations kept for backpropagation.
struct ForwardCache {
  detail::LayerCache layer1;
  detail::LayerCache layer2;
  Matrix mask1;  // empty at inference
  Matrix mask2;
  Matrix fc_input;
  Matrix pre_activation;
  std::uint64_t network_version = 0;
  bool train = false;
};

struct ForwardResult {
  Matrix output;  // out_dim x timesteps, every entry >= 0
  ForwardCache cache;
};

// Dropout masks are drawn independently per unit and per timestep (inverted
// dropout); at inference the dropout layers are the identity.
inline ForwardResult forward(const BiLstmNetwork& net, const Matrix& x, ForwardMode mode) {
  if (static_cast<std::size_t>(x.rows()) != net.input_dim())
    throw ShapeError("forward: sequence has " + std::to_string(x.rows()) + " features, network expects " +
                     std::to_string(net.input_dim()));
  if (x.cols() == 0) throw ShapeError("forward: empty sequence");
  ForwardResult r;
  auto& cache = r.cache;
  cache.network_version = net.version;
  cache.train = mode.train;
  Matrix y1 = detail::run_layer(net.params.layer1, x, cache.layer1);
  if (mode.train) {
    cache.mask1 = detail::dropout_mask(y1.rows(), y1.cols(), net.dropout1, mix_seed(mode.seed, 1));
    y1.array() *= cache.mask1.array();
  }
  Matrix y2 = detail::run_layer(net.params.layer2, y1, cache.layer2);
  if (mode.train) {
    cache.mask2 = detail::dropout_mask(y2.rows(), y2.cols(), net.dropout2, mix_seed(mode.seed, 2));
    y2.array() *= cache.mask2.array();
  }
  cache.pre_activation = net.params.fc_w * y2;
  cache.pre_activation.colwise() += net.params.fc_b.col(0);
  cache.fc_input = std::move(y2);
  r.output = cache.pre_activation.cwiseMax(0.0);
  return r;
}

inline Matrix BiLstmNetwork::predict(const Matrix& x) const { return forward(*this, x, ForwardMode::Infer()).output; }

struct LossResult {
  double loss = 0.0;
  Matrix grad;
};

// Mean of squared differences over every entry; grad = 2 (pred - target) / count.
inline LossResult mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ShapeError("mse_loss: prediction and target shapes differ");
  if (pred.size() == 0) throw ShapeError("mse_loss: empty matrices");
  const auto count = static_cast<double>(pred.size());
  Matrix diff = pred - target;
  return {diff.squaredNorm() / count, (2.0 / count) * diff};
}

using Gradients = NetworkParams;

inline Gradients backward(const BiLstmNetwork& net, const ForwardCache& cache, const Matrix& loss_grad) {
  if (cache.network_version != net.version)
    throw StateError("backward: forward cache was produced by a different parameter version");
  if (cache.pre_activation.rows() != loss_grad.rows() || cache.pre_activation.cols() != loss_grad.cols() ||
      cache.layer1.input.rows() != static_cast<Eigen::Index>(net.input_dim()) ||
      cache.layer1.fwd.h.rows() != static_cast<Eigen::Index>(net.hidden_dim()))
    throw StateError("backward: cache does not match this network or loss gradient");

  Gradients g = net.params.zeros_like();
  Matrix dA = (cache.pre_activation.array() > 0.0).select(loss_grad, 0.0);
  g.fc_w.noalias() = dA * cache.fc_input.transpose();
  g.fc_b = dA.rowwise().sum();
  Matrix dY2 = net.params.fc_w.transpose() * dA;
  if (cache.train) dY2.array() *= cache.mask2.array();
  Matrix dY1 = detail::backprop_layer(net.params.layer2, cache.layer2, dY2, g.layer2);
  if (cache.train) dY1.array() *= cache.mask1.array();
  detail::backprop_layer(net.params.layer1, cache.layer1, dY1, g.layer1);
  return g;
}

}  // namespace eegclean::nn
