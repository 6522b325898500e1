#pragma once

// Frontend plumbing between segments and network feature sequences, the
// per-feature scaler, and the end-to-end denoise path.

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eegclean/errors.hpp"
#include "eegclean/nn/network.hpp"
#include "eegclean/nn/train.hpp"
#include "eegclean/parallel.hpp"
#include "eegclean/signal.hpp"
#include "eegclean/tfa/cwt.hpp"
#include "eegclean/tfa/pack.hpp"
#include "eegclean/tfa/stft.hpp"
#include "eegclean/tfa/wsst.hpp"

namespace eegclean {

enum class Frontend : std::uint32_t { Raw = 0, STFT = 1, CWT = 2, WSST = 3 };

inline constexpr std::array<Frontend, 4> kAllFrontends{Frontend::Raw, Frontend::STFT, Frontend::CWT, Frontend::WSST};

inline std::string_view to_string(Frontend f) {
  switch (f) {
    case Frontend::Raw: return "raw";
    case Frontend::STFT: return "stft";
    case Frontend::CWT: return "cwt";
    case Frontend::WSST: return "wsst";
  }
  return "?";
}

inline Frontend parse_frontend(std::string_view s) {
  for (Frontend f : kAllFrontends)
    if (s == to_string(f)) return f;
  throw ConfigError("unknown frontend '" + std::string(s) + "' (expected raw, stft, cwt or wsst)");
}

inline tfa::Packing parse_packing(std::string_view s) {
  if (s == "raw") return tfa::Packing::RawSignal;
  if (s == "stacked") return tfa::Packing::RealImagStacked;
  if (s == "real") return tfa::Packing::RealOnly;
  throw ConfigError("unknown packing '" + std::string(s) + "' (expected raw, stacked or real)");
}

inline std::string_view packing_name(tfa::Packing p) {
  switch (p) {
    case tfa::Packing::RawSignal: return "raw";
    case tfa::Packing::RealImagStacked: return "stacked";
    case tfa::Packing::RealOnly: return "real";
  }
  return "?";
}

inline tfa::Packing default_packing(Frontend f) {
  switch (f) {
    case Frontend::Raw: return tfa::Packing::RawSignal;
    case Frontend::STFT: return tfa::Packing::RealImagStacked;
    case Frontend::CWT:
    case Frontend::WSST: return tfa::Packing::RealOnly;
  }
  throw ConfigError("unknown frontend");
}

inline void check_compatible(Frontend f, tfa::Packing p) {
  const bool raw_packing = p == tfa::Packing::RawSignal;
  if ((f == Frontend::Raw) != raw_packing)
    throw ConfigError("packing '" + std::string(packing_name(p)) + "' cannot be used with frontend '" +
                      std::string(to_string(f)) + "'");
}

// Number of feature rows produced for a segment of length n.
inline std::size_t feature_dim(Frontend f, tfa::Packing p, std::size_t n) {
  check_compatible(f, p);
  switch (f) {
    case Frontend::Raw: return 1;
    case Frontend::STFT: return tfa::packed_feature_count(tfa::StftParams{}.window_len / 2 + 1, p);
    case Frontend::CWT: return tfa::packed_feature_count(tfa::kCwtScaleCount, p);
    case Frontend::WSST: return tfa::packed_feature_count(tfa::kWsstBinCount, p);
  }
  (void)n;
  return 0;
}

// A z-scored segment in feature form, with what is needed to go back.
struct Analysis {
  tfa::FeatureSequence features;
  std::optional<tfa::TfCoefficients> coefficients;  // empty for Raw
  NormStats stats;
};

inline tfa::TfCoefficients forward_transform(const Segment& s, Frontend f) {
  switch (f) {
    case Frontend::STFT: return tfa::stft(s);
    case Frontend::CWT: return tfa::cwt(s);
    case Frontend::WSST: return tfa::wsst(s);
    case Frontend::Raw: break;
  }
  throw ConfigError("forward_transform: raw frontend has no transform");
}

inline Segment inverse_transform(const tfa::TfCoefficients& c) {
  switch (c.transform_tag) {
    case tfa::TransformTag::STFT: return tfa::istft(c);
    case tfa::TransformTag::CWT: return tfa::icwt(c);
    case tfa::TransformTag::WSST: return tfa::iwsst(c);
  }
  throw ConfigError("inverse_transform: unknown transform tag");
}

inline Analysis analyze(const Segment& segment, Frontend f, tfa::Packing p) {
  check_compatible(f, p);
  auto [z, stats] = zscore(segment);
  Analysis a;
  a.stats = stats;
  if (f == Frontend::Raw) {
    a.features = tfa::pack(z);
  } else {
    a.coefficients = forward_transform(z, f);
    a.features = tfa::pack(*a.coefficients, p);
  }
  return a;
}

// Back to a z-domain segment from a predicted feature matrix.
inline Segment synthesize(const nn::Matrix& predicted, const Analysis& a, double sample_rate) {
  tfa::FeatureSequence seq{predicted, a.features.packing};
  if (!a.coefficients) return tfa::unpack_signal(seq, sample_rate);
  Segment s = inverse_transform(tfa::unpack(seq, *a.coefficients));
  s.sample_rate = sample_rate;
  return s;
}

// Per-feature divisor: the geometric mean of the feature's own RMS and the
// global RMS, floored at 1e-3 of the global RMS. Targets are additionally
// lifted by `shift` so that most of them lie where the ReLU output can reach.
struct FeatureScaler {
  Eigen::VectorXd scale;
  double shift = 0.0;

  static FeatureScaler identity(std::size_t dim) { return {Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim)), 0.0}; }

  static FeatureScaler fit(std::span<const nn::Matrix* const> inputs, double shift = 0.0) {
    if (inputs.empty()) throw ConfigError("FeatureScaler::fit: no inputs");
    const Eigen::Index rows = inputs.front()->rows();
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(rows);
    double count = 0.0;
    for (const nn::Matrix* m : inputs) {
      if (m->rows() != rows) throw ShapeError("FeatureScaler::fit: inconsistent feature counts");
      sumsq += m->rowwise().squaredNorm();
      count += static_cast<double>(m->cols());
    }
    Eigen::VectorXd feature_rms = (sumsq / count).cwiseSqrt();
    const double global = std::sqrt(sumsq.sum() / (count * static_cast<double>(rows)));
    FeatureScaler s = identity(static_cast<std::size_t>(rows));
    s.shift = shift;
    if (global > 0.0) s.scale = (global * feature_rms.array()).sqrt().max(1e-3 * global).matrix();
    return s;
  }

  std::size_t dim() const { return static_cast<std::size_t>(scale.size()); }

  nn::Matrix scale_input(const nn::Matrix& x) const {
    check(x);
    return scale.cwiseInverse().asDiagonal() * x;
  }
  nn::Matrix scale_target(const nn::Matrix& x) const { return scale_input(x).array() + shift; }
  nn::Matrix unscale_output(const nn::Matrix& y) const {
    check(y);
    return scale.asDiagonal() * (y.array() - shift).matrix();
  }

 private:
  void check(const nn::Matrix& x) const {
    if (x.rows() != scale.size()) throw ShapeError("FeatureScaler: feature count mismatch");
  }
};

// A trained network or, when `net` is empty, a pass-through stub that returns
// its input unchanged.
struct DenoiserModel {
  Frontend frontend = Frontend::Raw;
  tfa::Packing packing = tfa::Packing::RawSignal;
  std::size_t feature_dim = 1;
  FeatureScaler scaler = FeatureScaler::identity(1);
  std::optional<nn::BiLstmNetwork> net;

  bool is_stub() const { return !net.has_value(); }

  nn::Matrix predict(const nn::Matrix& x) const {
    if (!net) return x;
    return scaler.unscale_output(net->predict(scaler.scale_input(x)));
  }

  static DenoiserModel stub(Frontend f, tfa::Packing p, std::size_t n = kDefaultSegmentLength) {
    DenoiserModel m;
    m.frontend = f;
    m.packing = p;
    m.feature_dim = eegclean::feature_dim(f, p, n);
    m.scaler = FeatureScaler::identity(m.feature_dim);
    return m;
  }
};

// zscore -> transform -> pack -> predict -> unpack -> inverse -> denorm.
// Denormalizes with `norm` when given, otherwise with the input's own stats.
inline Segment denoise(const DenoiserModel& model, const Segment& noisy, std::optional<NormStats> norm = std::nullopt) {
  Analysis a = analyze(noisy, model.frontend, model.packing);
  if (a.features.features() != model.feature_dim)
    throw ConfigError("denoise: frontend produces " + std::to_string(a.features.features()) +
                      " features, model expects " + std::to_string(model.feature_dim));
  Segment z = synthesize(model.predict(a.features.values), a, noisy.sample_rate);
  if (z.size() != noisy.size()) throw ShapeError("denoise: reconstructed length differs from input");
  Segment out = denorm(z, norm.value_or(a.stats));
  out.kind = SegmentKind::Denoised;
  return out;
}

inline Segment denoise(const DenoiserModel& model, const Segment& noisy, Frontend expected,
                       std::optional<NormStats> norm = std::nullopt) {
  if (expected != model.frontend)
    throw ConfigError("denoise: model was trained for frontend '" + std::string(to_string(model.frontend)) +
                      "', requested '" + std::string(to_string(expected)) + "'");
  return denoise(model, noisy, norm);
}

inline std::vector<Segment> denoise_all(const DenoiserModel& model, std::span<const Segment> noisy,
                                        std::size_t threads) {
  std::vector<Segment> out(noisy.size());
  parallel_for(noisy.size(), threads, [&](std::size_t i) { out[i] = denoise(model, noisy[i]); });
  return out;
}

// Feature-domain training pairs: noisy inputs against z-scored clean targets.
inline std::vector<nn::SequencePair> make_pairs(std::span<const Segment> noisy, std::span<const Segment> clean,
                                                Frontend f, tfa::Packing p, std::size_t threads) {
  if (noisy.size() != clean.size()) throw ShapeError("make_pairs: noisy and clean counts differ");
  std::vector<nn::SequencePair> pairs(noisy.size());
  parallel_for(noisy.size(), threads, [&](std::size_t i) {
    pairs[i].input = analyze(noisy[i], f, p).features.values;
    pairs[i].target = analyze(clean[i], f, p).features.values;
  });
  return pairs;
}

inline constexpr double kDefaultTargetShift = 3.0;

struct FitResult {
  DenoiserModel model;
  nn::TrainHistory history;
};

struct TrainingData {
  std::span<const Segment> train_noisy;
  std::span<const Segment> train_clean;
  std::span<const Segment> val_noisy;
  std::span<const Segment> val_clean;
};

namespace detail {

inline FitResult run_training(DenoiserModel model, const TrainingData& data, const nn::TrainConfig& cfg,
                              const std::function<void(const nn::EpochStats&)>& on_epoch) {
  auto train_pairs = make_pairs(data.train_noisy, data.train_clean, model.frontend, model.packing, cfg.threads);
  auto val_pairs = make_pairs(data.val_noisy, data.val_clean, model.frontend, model.packing, cfg.threads);
  for (auto* set : {&train_pairs, &val_pairs})
    for (auto& pr : *set) {
      if (static_cast<std::size_t>(pr.input.rows()) != model.feature_dim)
        throw ConfigError("training data does not match the model's feature dimension");
      pr.input = model.scaler.scale_input(pr.input);
      pr.target = model.scaler.scale_target(pr.target);
    }
  // Adam moments are not persisted, so a resumed run starts them from zero.
  auto state = nn::AdamState::for_network(*model.net);
  FitResult r;
  r.history = nn::train(*model.net, train_pairs, val_pairs, cfg, state, on_epoch);
  r.model = std::move(model);
  return r;
}

}  // namespace detail

// Fits the scaler on the training inputs, then trains a fresh network on
// scaled pairs. Validation RMSE is reported in the scaled feature domain.
inline FitResult fit_model(const TrainingData& data, Frontend f, tfa::Packing p, std::size_t hidden_dim,
                           const nn::TrainConfig& cfg, double target_shift = kDefaultTargetShift,
                           const std::function<void(const nn::EpochStats&)>& on_epoch = {}) {
  cfg.validate();
  check_compatible(f, p);
  if (hidden_dim == 0) throw ConfigError("fit_model: hidden_dim must be positive");
  if (data.train_noisy.empty()) throw ConfigError("fit_model: empty training set");

  DenoiserModel model;
  model.frontend = f;
  model.packing = p;
  std::vector<nn::Matrix> inputs(data.train_noisy.size());
  parallel_for(inputs.size(), cfg.threads,
               [&](std::size_t i) { inputs[i] = analyze(data.train_noisy[i], f, p).features.values; });
  std::vector<const nn::Matrix*> ptrs;
  for (const auto& m : inputs) ptrs.push_back(&m);
  model.feature_dim = static_cast<std::size_t>(inputs.front().rows());
  model.scaler = FeatureScaler::fit(ptrs, target_shift);
  model.net = nn::init_network(model.feature_dim, hidden_dim, model.feature_dim, mix_seed(cfg.rng_seed, 0x1a17));
  model.net->params.fc_b.setConstant(target_shift);
  return detail::run_training(std::move(model), data, cfg, on_epoch);
}

// Continues training an existing model; its scaler is kept as is.
inline FitResult resume_model(DenoiserModel model, const TrainingData& data, Frontend f, const nn::TrainConfig& cfg,
                              const std::function<void(const nn::EpochStats&)>& on_epoch = {}) {
  cfg.validate();
  if (model.frontend != f)
    throw ConfigError("resume: checkpoint frontend '" + std::string(to_string(model.frontend)) +
                      "' does not match requested '" + std::string(to_string(f)) + "'");
  if (model.is_stub()) throw ConfigError("resume: cannot train a pass-through checkpoint");
  if (data.train_noisy.empty()) throw ConfigError("resume: empty training set");
  return detail::run_training(std::move(model), data, cfg, on_epoch);
}

}  // namespace eegclean
