#pragma once

// Thin FFTW wrapper. Plans are created once per (length, direction) and
// cached; plan creation is serialized, execution uses the new-array
// interface which FFTW documents as thread-safe.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "eegclean/errors.hpp"

namespace eegclean::fft {

using cplx = std::complex<double>;

namespace detail {

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cplx> a(n), b(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(a.data()),
                                   reinterpret_cast<fftw_complex*>(b.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (p == nullptr) throw ConfigError("FFTW failed to create a plan");
    plans_.emplace(key, p);
    return p;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline void execute(std::span<const cplx> in, std::span<cplx> out, int sign) {
  if (in.size() != out.size()) throw ShapeError("fft: input/output length mismatch");
  if (in.empty()) return;
  fftw_plan p = PlanCache::instance().get(in.size(), sign);
  // FFTW never writes to the input of an out-of-place c2c transform.
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace detail

// X[k] = sum_n x[n] exp(-i 2 pi k n / N)
inline std::vector<cplx> forward(std::span<const cplx> x) {
  std::vector<cplx> out(x.size());
  detail::execute(x, out, FFTW_FORWARD);
  return out;
}

inline std::vector<cplx> forward(std::span<const double> x) {
  std::vector<cplx> in(x.begin(), x.end());
  return forward(std::span<const cplx>(in));
}

// x[n] = (1/N) sum_k X[k] exp(+i 2 pi k n / N)
inline std::vector<cplx> inverse(std::span<const cplx> X) {
  std::vector<cplx> out(X.size());
  detail::execute(X, out, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(X.size());
  for (auto& v : out) v *= scale;
  return out;
}

// Angular frequency (rad/s) of FFT bin k for a length-n transform. Bins at and
// above n/2 map to negative frequencies.
inline double angular_frequency(std::size_t k, std::size_t n, double sample_rate) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  const double kk = (2 * k < n) ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
  return two_pi * kk * sample_rate / static_cast<double>(n);
}

}  // namespace eegclean::fft
