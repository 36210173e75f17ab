#include "psforge/stft.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "psforge/fft.hpp"

namespace psforge {

void validate(const Waveform& wave) {
  if (wave.sample_rate <= 0) throw InvalidInput("sample rate must be positive");
  if (wave.samples.empty()) throw InvalidInput("empty waveform");
  for (std::size_t i = 0; i < wave.samples.size(); ++i) {
    const double s = wave.samples[i];
    if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
      throw InvalidInput("sample " + std::to_string(i) + " is outside [-1, 1]");
    }
  }
}

void validate(const StftConfig& cfg) {
  if (cfg.hop_length == 0 || cfg.hop_length > cfg.window_length ||
      cfg.window_length > cfg.fft_size) {
    throw InvalidInput("STFT config requires 0 < hop <= window <= fft_size");
  }
  if ((cfg.fft_size & (cfg.fft_size - 1)) != 0 || cfg.fft_size < 2) {
    throw InvalidInput("fft_size must be a power of two");
  }
}

std::vector<double> make_window(WindowFunction fn, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (fn == WindowFunction::kHann) {
    for (std::size_t n = 0; n < length; ++n) {
      w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                  static_cast<double>(length));
    }
  }
  return w;
}

std::size_t frame_count(std::size_t length, const StftConfig& cfg) {
  const std::size_t pad = cfg.window_length / 2;
  const std::size_t padded = length + 2 * pad;
  if (padded < cfg.window_length) return 0;
  return (padded - cfg.window_length) / cfg.hop_length + 1;
}

std::size_t reflect_index(std::ptrdiff_t padded_index, std::size_t pad, std::size_t length) {
  if (length == 1) return 0;
  const auto n = static_cast<std::ptrdiff_t>(length);
  const std::ptrdiff_t period = 2 * (n - 1);
  std::ptrdiff_t i = (padded_index - static_cast<std::ptrdiff_t>(pad)) % period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < n ? i : period - i);
}

Spectrogram stft_magnitude(std::span<const double> signal, const StftConfig& cfg,
                           int sample_rate) {
  validate(cfg);
  if (signal.empty()) throw InvalidInput("empty signal");

  const std::size_t n_frames = frame_count(signal.size(), cfg);
  const std::size_t pad = cfg.window_length / 2;
  const auto window = make_window(cfg.window, cfg.window_length);

  Spectrogram out{Matrix(n_frames, cfg.bins()), cfg, sample_rate};
  RealFft fft(cfg.fft_size);
  std::vector<double> frame(cfg.window_length);
  std::vector<std::complex<double>> spectrum(cfg.bins());

  for (std::size_t t = 0; t < n_frames; ++t) {
    const auto start = static_cast<std::ptrdiff_t>(t * cfg.hop_length);
    for (std::size_t m = 0; m < cfg.window_length; ++m) {
      frame[m] = window[m] *
                 signal[reflect_index(start + static_cast<std::ptrdiff_t>(m), pad, signal.size())];
    }
    fft.forward(frame, spectrum);
    auto row = out.magnitudes.row(t);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = std::abs(spectrum[k]);
  }
  return out;
}

Spectrogram stft_magnitude(const Waveform& wave, const StftConfig& cfg) {
  validate(wave);
  return stft_magnitude(wave.samples, cfg, wave.sample_rate);
}

Spectrogram magnitude_for_sequence(std::span<const double> seq, const ResolutionSpec& res) {
  if (res.window_size == 0 || seq.size() < res.window_size) {
    throw InvalidInput("sequence of length " + std::to_string(seq.size()) +
                       " is shorter than the window (" + std::to_string(res.window_size) + ")");
  }
  for (double v : seq) {
    if (!std::isfinite(v)) throw InvalidInput("non-finite value in sequence");
  }
  return stft_magnitude(seq, res.to_stft_config(), 1);
}

}  // namespace psforge
