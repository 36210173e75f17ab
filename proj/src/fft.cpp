#include "psforge/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cassert>
#include <mutex>

#include "psforge/common.hpp"

namespace psforge {
namespace {

// Only fftw_execute* is thread-safe; planning and destruction are not.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t size) : size_(size) {
  if (size < 2 || size % 2 != 0) {
    throw InvalidInput("FFT size must be even and >= 2");
  }
  real_ = fftw_alloc_real(size_);
  auto* spec = fftw_alloc_complex(bins());
  spectrum_ = spec;
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(size_), real_, spec, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(size_), spec, real_,
                                       FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(spectrum_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  assert(in.size() <= size_ && out.size() >= bins());
  std::copy(in.begin(), in.end(), real_);
  std::fill(real_ + in.size(), real_ + size_, 0.0);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  const auto* spec = static_cast<const fftw_complex*>(spectrum_);
  for (std::size_t k = 0; k < bins(); ++k) {
    out[k] = {spec[k][0], spec[k][1]};
  }
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  assert(in.size() >= bins() && out.size() >= size_);
  auto* spec = static_cast<fftw_complex*>(spectrum_);
  for (std::size_t k = 0; k < bins(); ++k) {
    spec[k][0] = in[k].real();
    spec[k][1] = in[k].imag();
  }
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  std::copy(real_, real_ + size_, out.begin());
}

Dct1::Dct1(std::size_t n) : n_(n) {
  if (n < 2) throw InvalidInput("DCT-I length must be >= 2");
  in_ = fftw_alloc_real(n_);
  out_ = fftw_alloc_real(n_);
  std::lock_guard lock(planner_mutex());
  plan_ = fftw_plan_r2r_1d(static_cast<int>(n_), in_, out_, FFTW_REDFT00, FFTW_ESTIMATE);
}

Dct1::~Dct1() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  fftw_free(in_);
  fftw_free(out_);
}

void Dct1::transform(std::span<const double> in, std::span<double> out) {
  assert(in.size() == n_ && out.size() >= n_);
  std::copy(in.begin(), in.end(), in_);
  fftw_execute(static_cast<fftw_plan>(plan_));
  std::copy(out_, out_ + n_, out.begin());
}

}  // namespace psforge
