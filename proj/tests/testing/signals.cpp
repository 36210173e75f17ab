#include "testing/signals.hpp"

#include <cmath>
#include <numbers>

namespace psforge::testing {
namespace {

std::size_t length_of(double seconds, int sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

}  // namespace

Waveform sine(double hz, double seconds, double amplitude, int sample_rate) {
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(length_of(seconds, sample_rate));
  for (std::size_t n = 0; n < w.samples.size(); ++n) {
    w.samples[n] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(n) /
                                        sample_rate);
  }
  return w;
}

Waveform pulse_train(double f0_hz, double seconds, double amplitude, int sample_rate) {
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(length_of(seconds, sample_rate), 0.0);
  const double period = sample_rate / f0_hz;
  for (double pos = 0.0; pos < static_cast<double>(w.samples.size()); pos += period) {
    const auto i = static_cast<std::size_t>(std::llround(pos));
    if (i < w.samples.size()) w.samples[i] = amplitude;
  }
  return w;
}

Waveform harmonic(const std::function<double(double)>& f0_at, double seconds, double amplitude,
                  int sample_rate) {
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(length_of(seconds, sample_rate));
  double phase = 0.0;
  double norm = 0.0;
  for (int h = 1; h <= 60; ++h) norm += 1.0 / h;
  for (std::size_t n = 0; n < w.samples.size(); ++n) {
    const double f0 = f0_at(static_cast<double>(n) / sample_rate);
    double acc = 0.0;
    for (int h = 1; h <= 60 && h * f0 < 0.45 * sample_rate; ++h) {
      acc += std::sin(h * phase) / h;
    }
    w.samples[n] = amplitude * acc / norm * 2.0;
    phase += 2.0 * std::numbers::pi * f0 / sample_rate;
    if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
  }
  return w;
}

Waveform harmonic(double f0_hz, double seconds, double amplitude, int sample_rate) {
  return harmonic([f0_hz](double) { return f0_hz; }, seconds, amplitude, sample_rate);
}

Waveform white_noise(double seconds, double amplitude, std::uint32_t seed, int sample_rate) {
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(length_of(seconds, sample_rate));
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  for (double& s : w.samples) s = dist(rng);
  return w;
}

Waveform silence(double seconds, int sample_rate) {
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(length_of(seconds, sample_rate), 0.0);
  return w;
}

Spectrogram random_spectrogram(std::size_t frames, std::size_t fft_size, std::mt19937& rng,
                               double scale, double zero_fraction) {
  StftConfig cfg;
  cfg.fft_size = fft_size;
  cfg.window_length = fft_size;
  cfg.hop_length = fft_size / 4;
  Spectrogram s{Matrix(frames, fft_size / 2 + 1), cfg, 24000};
  std::uniform_real_distribution<double> mag(0.0, scale);
  std::bernoulli_distribution zero(zero_fraction);
  for (double& v : s.magnitudes.data()) v = zero(rng) ? 0.0 : mag(rng);
  return s;
}

}  // namespace psforge::testing
