#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

#include "nlsnet/error.hpp"

namespace nlsnet {

using cplx = std::complex<double>;

namespace detail {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  PlanPair() = default;
  PlanPair(const PlanPair&) = delete;
  PlanPair& operator=(const PlanPair&) = delete;
  ~PlanPair() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

// FFTW planning is not thread-safe, execution of an existing plan on new
// arrays is. Plans are created once per size under a lock and never mutated.
inline std::shared_ptr<const PlanPair> plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const PlanPair>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<cplx> in(n), out(n);
  auto* pin = reinterpret_cast<fftw_complex*>(in.data());
  auto* pout = reinterpret_cast<fftw_complex*>(out.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  auto pair = std::make_shared<PlanPair>();
  pair->forward = fftw_plan_dft_1d(static_cast<int>(n), pin, pout, FFTW_FORWARD, flags);
  pair->backward = fftw_plan_dft_1d(static_cast<int>(n), pin, pout, FFTW_BACKWARD, flags);
  if (!pair->forward || !pair->backward)
    throw Error(ErrorKind::invalid_argument, "FFTW could not plan a transform of this size");
  cache.emplace(n, pair);
  return pair;
}

}  // namespace detail

/// Unitary-up-to-scale discrete Fourier transform on M samples:
/// forward is the unnormalized DFT, inverse carries the 1/M factor so that
/// inverse(forward(f)) == f.
class SpectralTransform {
 public:
  explicit SpectralTransform(std::size_t n) : n_(n), plans_(detail::plans_for(n)) {}

  std::size_t size() const { return n_; }

  std::vector<cplx> forward(std::span<const cplx> in) const {
    check(in.size());
    std::vector<cplx> src(in.begin(), in.end());
    std::vector<cplx> out(n_);
    fftw_execute_dft(plans_->forward, reinterpret_cast<fftw_complex*>(src.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
  }

  std::vector<cplx> inverse(std::span<const cplx> in) const {
    check(in.size());
    std::vector<cplx> src(in.begin(), in.end());
    std::vector<cplx> out(n_);
    fftw_execute_dft(plans_->backward, reinterpret_cast<fftw_complex*>(src.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : out) v *= scale;
    return out;
  }

 private:
  void check(std::size_t m) const {
    if (m != n_) throw Error(ErrorKind::length_mismatch, "transform size mismatch");
  }

  std::size_t n_;
  std::shared_ptr<const detail::PlanPair> plans_;
};

}  // namespace nlsnet
