#include "psforge/f0loss.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "psforge/fft.hpp"

namespace psforge {

void validate(const LossConfig& cfg) {
  if (cfg.resolutions.empty()) throw InvalidInput("loss needs at least one resolution");
  if (!(cfg.weight >= 0.0)) throw InvalidInput("loss weight must be non-negative");
  if (!(cfg.floor > 0.0)) throw InvalidInput("magnitude floor must be positive");
  std::size_t min_bins = SIZE_MAX;
  for (const auto& res : cfg.resolutions) {
    validate(res.to_stft_config());
    min_bins = std::min(min_bins, res.fft_size / 2 + 1);
  }
  if (cfg.beta < 1 || cfg.beta > min_bins) {
    throw InvalidInput("beta must lie in [1, " + std::to_string(min_bins) + "]");
  }
}

double f0_stft_loss_from_magnitudes(const Matrix& reference, const Matrix& predicted,
                                    std::size_t beta, double floor) {
  if (!reference.same_shape(predicted)) throw InvalidInput("magnitude shapes differ");
  const std::size_t n_bins = reference.cols();
  if (beta < 1 || beta > n_bins) {
    throw InvalidInput("beta " + std::to_string(beta) + " outside [1, " +
                       std::to_string(n_bins) + "]");
  }
  if (reference.rows() == 0) throw InvalidInput("no frames");
  double total = 0.0;
  for (std::size_t n = 0; n < reference.rows(); ++n) {
    const auto x = reference.row(n);
    const auto xh = predicted.row(n);
    for (std::size_t k = beta - 1; k < n_bins; ++k) {
      total += std::abs(std::log(std::max(x[k], floor)) - std::log(std::max(xh[k], floor)));
    }
  }
  const double count = static_cast<double>(reference.rows() * (n_bins - beta + 1));
  return total / count;
}

namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidInput("F0 sequences differ in length (" + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + ")");
  }
}

}  // namespace

double f0_stft_loss(std::span<const double> reference, std::span<const double> predicted,
                    const ResolutionSpec& res, std::size_t beta, double floor) {
  check_pair(reference, predicted);
  return f0_stft_loss_from_magnitudes(magnitude_for_sequence(reference, res).magnitudes,
                                      magnitude_for_sequence(predicted, res).magnitudes, beta,
                                      floor);
}

MultiResolutionLoss multires_f0_loss_detailed(std::span<const double> reference,
                                              std::span<const double> predicted,
                                              const LossConfig& cfg) {
  validate(cfg);
  check_pair(reference, predicted);
  MultiResolutionLoss out;
  double sum = 0.0;
  for (const auto& res : cfg.resolutions) {
    out.per_resolution.push_back(f0_stft_loss(reference, predicted, res, cfg.beta, cfg.floor));
    sum += out.per_resolution.back();
  }
  out.value = cfg.weight * sum / static_cast<double>(cfg.resolutions.size());
  return out;
}

double multires_f0_loss(std::span<const double> reference, std::span<const double> predicted,
                        const LossConfig& cfg) {
  return multires_f0_loss_detailed(reference, predicted, cfg).value;
}

std::vector<double> multires_f0_loss_gradient(std::span<const double> reference,
                                              std::span<const double> predicted,
                                              const LossConfig& cfg) {
  validate(cfg);
  check_pair(reference, predicted);
  const std::size_t len = predicted.size();
  std::vector<double> grad(len, 0.0);

  for (const auto& res : cfg.resolutions) {
    const Matrix ref_mag = magnitude_for_sequence(reference, res).magnitudes;
    const StftConfig stft = res.to_stft_config();
    const std::size_t n_frames = ref_mag.rows();
    const std::size_t n_bins = ref_mag.cols();
    const std::size_t pad = stft.window_length / 2;
    const auto window = make_window(stft.window, stft.window_length);
    const double scale = cfg.weight / static_cast<double>(cfg.resolutions.size()) /
                         static_cast<double>(n_frames * (n_bins - cfg.beta + 1));

    RealFft fft(stft.fft_size);
    std::vector<double> frame(stft.window_length), back(stft.fft_size);
    std::vector<std::complex<double>> spectrum(n_bins), upstream(n_bins);

    for (std::size_t n = 0; n < n_frames; ++n) {
      const auto start = static_cast<std::ptrdiff_t>(n * stft.hop_length);
      for (std::size_t m = 0; m < stft.window_length; ++m) {
        frame[m] = window[m] *
                   predicted[reflect_index(start + static_cast<std::ptrdiff_t>(m), pad, len)];
      }
      fft.forward(frame, spectrum);

      // upstream[k] = dL/d|Z_k| * Z_k / |Z_k|, so that the gradient with
      // respect to frame sample m is Re(sum_k upstream[k] e^{+i 2 pi k m / F}).
      const auto x = ref_mag.row(n);
      bool any = false;
      for (std::size_t k = 0; k < n_bins; ++k) {
        upstream[k] = 0.0;
        if (k + 1 < cfg.beta) continue;
        const double mag = std::abs(spectrum[k]);
        if (!(mag > cfg.floor)) continue;
        const double diff = std::log(mag) - std::log(std::max(x[k], cfg.floor));
        if (diff == 0.0) continue;
        const double dmag = (diff > 0.0 ? scale : -scale) / mag;
        upstream[k] = dmag * spectrum[k] / mag;
        any = true;
      }
      if (!any) continue;

      // c2r sums the Hermitian completion: interior bins count twice.
      upstream[0] = upstream[0].real();
      upstream[n_bins - 1] = upstream[n_bins - 1].real();
      for (std::size_t k = 1; k + 1 < n_bins; ++k) upstream[k] *= 0.5;
      fft.inverse(upstream, back);

      for (std::size_t m = 0; m < stft.window_length; ++m) {
        grad[reflect_index(start + static_cast<std::ptrdiff_t>(m), pad, len)] += window[m] * back[m];
      }
    }
  }
  return grad;
}

}  // namespace psforge
