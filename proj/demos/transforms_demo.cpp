// Prints feature shapes and round-trip errors of the three transforms on one
// synthetic contaminated segment.

#include <cmath>
#include <cstdio>

#include "eegclean/dataset/synth.hpp"
#include "eegclean/pipeline.hpp"

using namespace eegclean;

static double rel_error(const Segment& a, const Segment& b, std::size_t guard) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = guard; i + guard < a.size(); ++i) {
    num += (a.samples[i] - b.samples[i]) * (a.samples[i] - b.samples[i]);
    den += a.samples[i] * a.samples[i];
  }
  return std::sqrt(num / den);
}

int main() {
  auto eeg = dataset::synth_eeg(1, 512, 256.0, 1).front();
  auto eog = dataset::synth_eog(1, 512, 256.0, 2).front();
  auto noisy = contaminate(eeg, eog, SnrDb{-3.0}).noisy;
  auto z = zscore(noisy).first;

  for (Frontend f : {Frontend::STFT, Frontend::CWT, Frontend::WSST}) {
    const auto p = default_packing(f);
    auto a = analyze(noisy, f, p);
    auto back = inverse_transform(*a.coefficients);
    std::printf("%-5s coefficients %3ld x %3ld  packed (%s) %3zu x %3zu  round-trip rel. error %.2e\n",
                std::string(to_string(f)).c_str(), static_cast<long>(a.coefficients->bins()),
                static_cast<long>(a.coefficients->frames()), std::string(packing_name(p)).c_str(),
                a.features.features(), a.features.timesteps(), rel_error(z, back, 16));
  }
}
