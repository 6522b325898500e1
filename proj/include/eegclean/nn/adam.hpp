#pragma once

#include <cmath>
#include <cstdint>

#include "eegclean/nn/network.hpp"

namespace eegclean::nn {

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t epochs = 10;
  std::size_t batch_size = 150;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t rng_seed = 0;
  double clip_norm = 1.0;  // global L2 gradient norm; <= 0 disables clipping
  std::size_t threads = 1;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0))
      throw ConfigError("Adam betas must lie in (0, 1)");
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  }
};

struct AdamState {
  NetworkParams m;
  NetworkParams v;
  std::uint64_t step = 0;

  static AdamState for_network(const BiLstmNetwork& net) {
    return {net.params.zeros_like(), net.params.zeros_like(), 0};
  }
};

// Bias-corrected Adam update. Increments the network version.
inline void adam_step(BiLstmNetwork& net, const Gradients& grads, AdamState& state, const TrainConfig& cfg) {
  if (!net.params.same_shape(grads) || !net.params.same_shape(state.m) || !net.params.same_shape(state.v))
    throw ShapeError("adam_step: gradient or moment shapes do not match the network");
  state.step += 1;
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  auto params = net.params.tensors();
  auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t t = 0; t < NetworkParams::kTensorCount; ++t) {
    auto P = params[t]->array();
    auto G = g[t]->array();
    auto M = m[t]->array();
    auto V = v[t]->array();
    M = b1 * M + (1.0 - b1) * G;
    V = b2 * V + (1.0 - b2) * G.square();
    P -= cfg.learning_rate * (M / c1) / ((V / c2).sqrt() + cfg.adam_eps);
  }
  net.version += 1;
}

}  // namespace eegclean::nn
