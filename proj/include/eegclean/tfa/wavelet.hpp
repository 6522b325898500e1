#pragma once

#include <cmath>

#include "eegclean/tfa/types.hpp"

namespace eegclean::tfa {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Fourier transform of the mother wavelet at dimensionless angular frequency w.
// Both families are analytic (zero for w <= 0) and real-valued.
//   bump:    exp(1 - 1 / (1 - ((w - mu) / sigma)^2)) for |w - mu| < sigma
//   Morlet:  2 exp(-(w - omega0)^2 / 2) for w > 0
inline double wavelet_fourier(const WaveletSpec& spec, double w) {
  if (spec.family == WaveletFamily::Bump) {
    const double u = (w - spec.bump_mu) / spec.bump_sigma;
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
  }
  if (w <= 0.0) return 0.0;
  const double d = w - spec.omega0;
  return 2.0 * std::exp(-0.5 * d * d);
}

// Support [lo, hi] outside which the spectrum is zero or below 1e-20.
inline std::pair<double, double> wavelet_support(const WaveletSpec& spec) {
  if (spec.family == WaveletFamily::Bump)
    return {spec.bump_mu - spec.bump_sigma, spec.bump_mu + spec.bump_sigma};
  return {std::max(spec.omega0 - 10.0, 1e-3 * spec.omega0), spec.omega0 + 10.0};
}

// C = integral_0^inf psi_hat(w) / w dw, the constant of the single-integral
// reconstruction x(b) = (2 / C) Re integral W(a, b) da / a.
inline double admissibility_constant(const WaveletSpec& spec) {
  spec.validate();
  auto [lo, hi] = wavelet_support(spec);
  // Composite Simpson; the integrands are smooth on the support.
  constexpr int intervals = 20000;
  const double h = (hi - lo) / intervals;
  auto f = [&](double w) { return wavelet_fourier(spec, w) / w; };
  double acc = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Centre frequency in Hz of the wavelet dilated to `scale` seconds.
inline double scale_to_frequency(const WaveletSpec& spec, double scale) {
  return spec.peak_omega() / (kTwoPi * scale);
}

inline double frequency_to_scale(const WaveletSpec& spec, double hz) {
  return spec.peak_omega() / (kTwoPi * hz);
}

}  // namespace eegclean::tfa
