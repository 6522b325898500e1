// Trains a small raw-signal denoiser on synthetic data and compares it with
// doing nothing, level by level.

#include <cstdio>

#include "eegclean/dataset/augment.hpp"
#include "eegclean/dataset/synth.hpp"
#include "eegclean/eval.hpp"

using namespace eegclean;

int main() {
  const std::uint64_t seed = 7;
  auto eeg = dataset::synth_eeg(120, 512, 256.0, seed);
  auto eog = dataset::synth_eog(120, 512, 256.0, seed + 1);
  auto pairs = dataset::augment_sweep(eeg, eog, 8, seed + 2);
  dataset::SplitSpec spec;
  spec.seed = seed;
  auto parts = dataset::split(pairs, spec);

  std::vector<Segment> noisy, clean;
  for (const auto& p : parts.train) {
    noisy.push_back(p.noisy);
    clean.push_back(p.clean);
  }
  nn::TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 4;
  cfg.epochs = 2;
  cfg.rng_seed = seed;
  cfg.threads = 0;
  auto fit = fit_model(TrainingData{noisy, clean, {}, {}}, Frontend::Raw, tfa::Packing::RawSignal, 24, cfg);

  auto report = eval::run_sweep(fit.model, parts.test, Frontend::Raw);
  std::printf("snr_db  model_mse  baseline_mse\n");
  for (const auto& row : report.rows) std::printf("%6.0f  %9.4f  %12.4f\n", row.snr_db, row.model_mse, row.baseline_mse);
  std::printf("overall %8.4f  %12.4f\n", report.model_mse, report.baseline_mse);
}
