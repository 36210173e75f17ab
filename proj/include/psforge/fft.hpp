#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace psforge {

/// Real-input FFT of a fixed size backed by FFTW. Plans are created once per
/// object; an object is not safe to share across threads, but any number of
/// objects may execute concurrently.
class RealFft {
 public:
  explicit RealFft(std::size_t size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  /// Forward transform: X_k = sum_n x_n e^{-2 pi i k n / size}, k < bins().
  /// `in` may be shorter than size(); the remainder is zero-padded.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);

  /// Unnormalized inverse of a Hermitian half spectrum:
  /// y_n = sum_{k=0}^{size-1} X_k e^{+2 pi i k n / size}. The imaginary parts
  /// of DC and Nyquist are ignored.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t size_;
  double* real_ = nullptr;
  void* spectrum_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

/// Type-I discrete cosine transform of length n >= 2 (FFTW REDFT00):
///   Y_k = x_0 + (-1)^k x_{n-1} + 2 sum_{j=1}^{n-2} x_j cos(pi j k / (n-1)).
/// This equals the DFT of the even extension of x to length 2(n-1), which is
/// how real cepstra of symmetric log spectra are computed.
class Dct1 {
 public:
  explicit Dct1(std::size_t n);
  ~Dct1();
  Dct1(const Dct1&) = delete;
  Dct1& operator=(const Dct1&) = delete;

  std::size_t size() const { return n_; }
  void transform(std::span<const double> in, std::span<double> out);

 private:
  std::size_t n_;
  double* in_ = nullptr;
  double* out_ = nullptr;
  void* plan_ = nullptr;
};

}  // namespace psforge
