#include "psforge/separation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "psforge/fft.hpp"

namespace psforge {

std::size_t lifter_cutoff_index(double cutoff_ms, int sample_rate) {
  if (!(cutoff_ms > 0.0) || !std::isfinite(cutoff_ms)) {
    throw InvalidInput("lifter cutoff must be positive");
  }
  const double q = std::round(cutoff_ms * 1e-3 * sample_rate);
  if (q < 1.0) throw InvalidInput("lifter cutoff is below one quefrency sample");
  return static_cast<std::size_t>(q);
}

std::vector<double> lag_window(std::size_t n, std::size_t cutoff_index, LifterShape shape) {
  std::vector<double> w(n, 0.0);
  const std::size_t keep = std::min(n, cutoff_index);
  for (std::size_t q = 0; q < keep; ++q) {
    w[q] = shape == LifterShape::kRectangular
               ? 1.0
               : 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(q) /
                                       static_cast<double>(cutoff_index)));
  }
  return w;
}

std::vector<double> real_cepstrum(std::span<const double> log_spectrum) {
  const std::size_t k = log_spectrum.size();
  Dct1 dct(k);
  std::vector<double> cep(k);
  dct.transform(log_spectrum, cep);
  const double scale = 1.0 / static_cast<double>(2 * (k - 1));
  for (double& c : cep) c *= scale;
  return cep;
}

Spectrogram floor_magnitudes(const Spectrogram& spec) {
  Spectrogram out = spec;
  for (double& v : out.magnitudes.data()) v = std::max(v, kMagnitudeFloor);
  return out;
}

Separation lag_window_separate(const Spectrogram& spec, const SeparationOptions& opts) {
  const std::size_t n_bins = spec.bins();
  if (n_bins < 2) throw InvalidInput("spectrogram needs at least two frequency bins");
  for (double v : spec.magnitudes.data()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput("spectrogram magnitudes must be finite and non-negative");
    }
  }
  const double window_ms =
      1e3 * static_cast<double>(spec.config.window_length) / spec.sample_rate;
  if (!(opts.lifter_cutoff_ms < window_ms)) {
    throw InvalidInput("lifter cutoff " + std::to_string(opts.lifter_cutoff_ms) +
                       " ms must be shorter than the analysis window");
  }
  const std::size_t cutoff = lifter_cutoff_index(opts.lifter_cutoff_ms, spec.sample_rate);
  if (cutoff >= n_bins) throw InvalidInput("lifter cutoff exceeds the cepstrum length");
  const auto lifter = lag_window(n_bins, cutoff, opts.shape);

  Separation out;
  out.envelope = {Matrix(spec.frames(), n_bins), opts.lifter_cutoff_ms, spec.config,
                  spec.sample_rate};
  out.fine = {Matrix(spec.frames(), n_bins)};

  Dct1 dct(n_bins);
  const double scale = 1.0 / static_cast<double>(2 * (n_bins - 1));
  std::vector<double> log_mag(n_bins), cep(n_bins), env_log(n_bins);
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    const auto mag = spec.magnitudes.row(t);
    for (std::size_t k = 0; k < n_bins; ++k) log_mag[k] = std::log(std::max(mag[k], kMagnitudeFloor));
    dct.transform(log_mag, cep);
    for (std::size_t q = 0; q < n_bins; ++q) cep[q] *= scale * lifter[q];
    dct.transform(cep, env_log);

    auto env = out.envelope.values.row(t);
    auto fine = out.fine.values.row(t);
    for (std::size_t k = 0; k < n_bins; ++k) {
      env[k] = std::exp(env_log[k]);
      fine[k] = std::exp(log_mag[k] - env_log[k]);
    }
  }
  return out;
}

Spectrogram recombine(const SpectralEnvelope& env, const FineStructure& fine) {
  if (!env.values.same_shape(fine.values)) {
    throw InvalidInput("envelope and fine structure shapes differ");
  }
  Spectrogram out{Matrix(env.values.rows(), env.values.cols()), env.config, env.sample_rate};
  const auto e = env.values.data();
  const auto f = fine.values.data();
  auto o = out.magnitudes.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = e[i] * f[i];
  return out;
}

}  // namespace psforge
