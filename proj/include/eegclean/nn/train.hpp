#pragma once

// Mini-batch training loop: seeded shuffle per epoch, per-sample gradients
// computed in parallel and reduced in index order, global-norm clipping, Adam.

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "eegclean/nn/adam.hpp"
#include "eegclean/nn/network.hpp"
#include "eegclean/parallel.hpp"

namespace eegclean::nn {

struct SequencePair {
  Matrix input;   // features x timesteps
  Matrix target;  // out_dim x timesteps
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean per-sample loss in train mode
  double val_rmse = std::numeric_limits<double>::quiet_NaN();
  std::size_t steps = 0;    // optimizer steps taken so far
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

// Seeded Fisher-Yates over [0, n).
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

inline void clip_global_norm(Gradients& g, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = std::sqrt(g.squared_norm());
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (Matrix* m : g.tensors()) *m *= s;
  }
}

inline double feature_rmse(const BiLstmNetwork& net, std::span<const SequencePair> data, std::size_t threads) {
  if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> mse(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    mse[i] = mse_loss(net.predict(data[i].input), data[i].target).loss;
  });
  return std::sqrt(std::accumulate(mse.begin(), mse.end(), 0.0) / static_cast<double>(mse.size()));
}

inline void check_pairs(const BiLstmNetwork& net, std::span<const SequencePair> data) {
  for (const auto& p : data) {
    if (static_cast<std::size_t>(p.input.rows()) != net.input_dim() ||
        static_cast<std::size_t>(p.target.rows()) != net.out_dim() || p.input.cols() != p.target.cols())
      throw ShapeError("train: pair shapes are inconsistent with the network");
  }
}

// Returns per-epoch history. `state` carries Adam moments across calls.
inline TrainHistory train(BiLstmNetwork& net, std::span<const SequencePair> train_set,
                          std::span<const SequencePair> val_set, const TrainConfig& cfg, AdamState& state,
                          const std::function<void(const EpochStats&)>& on_epoch = {}) {
  cfg.validate();
  if (train_set.empty()) throw ConfigError("train: empty training set");
  check_pairs(net, train_set);
  check_pairs(net, val_set);

  TrainHistory history;
  const std::size_t n = train_set.size();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = shuffled_indices(n, mix_seed(cfg.rng_seed, 0x5eed, epoch));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      std::vector<Gradients> grads(count);
      std::vector<double> losses(count);
      parallel_for(count, cfg.threads, [&](std::size_t k) {
        const auto& pair = train_set[order[start + k]];
        const auto mode = ForwardMode::Train(mix_seed(cfg.rng_seed, epoch + 1, start + k));
        auto fr = forward(net, pair.input, mode);
        auto lr = mse_loss(fr.output, pair.target);
        losses[k] = lr.loss;
        grads[k] = backward(net, fr.cache, lr.grad);
      });
      Gradients total = std::move(grads[0]);
      auto acc = total.tensors();
      for (std::size_t k = 1; k < count; ++k) {
        auto gk = grads[k].tensors();
        for (std::size_t t = 0; t < NetworkParams::kTensorCount; ++t) *acc[t] += *gk[t];
      }
      for (Matrix* m : acc) *m /= static_cast<double>(count);
      for (double l : losses) loss_sum += l;
      clip_global_norm(total, cfg.clip_norm);
      adam_step(net, total, state, cfg);
    }
    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.train_loss = loss_sum / static_cast<double>(n);
    stats.val_rmse = feature_rmse(net, val_set, cfg.threads);
    stats.steps = state.step;
    history.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return history;
}

inline TrainHistory train(BiLstmNetwork& net, std::span<const SequencePair> train_set,
                          std::span<const SequencePair> val_set, const TrainConfig& cfg) {
  auto state = AdamState::for_network(net);
  return train(net, train_set, val_set, cfg, state);
}

}  // namespace eegclean::nn
