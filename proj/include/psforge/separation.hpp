#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "psforge/stft.hpp"

namespace psforge {

/// Magnitudes are floored at this value before taking logs.
inline constexpr double kMagnitudeFloor = 1e-10;
inline constexpr double kDefaultLifterCutoffMs = 2.0;

enum class LifterShape {
  kRectangular,  // hard cutoff
  kHann,         // raised-cosine taper reaching zero at the cutoff
};

struct SeparationOptions {
  double lifter_cutoff_ms = kDefaultLifterCutoffMs;
  LifterShape shape = LifterShape::kRectangular;
};

/// Slowly varying factor of the magnitude spectrum. Strictly positive.
struct SpectralEnvelope {
  Matrix values;
  double lifter_cutoff_ms = kDefaultLifterCutoffMs;
  StftConfig config;
  int sample_rate = kDefaultSampleRate;
};

/// Harmonic residual: magnitude / envelope. Strictly positive.
struct FineStructure {
  Matrix values;
};

struct Separation {
  SpectralEnvelope envelope;
  FineStructure fine;
};

/// Number of quefrency samples passed to the envelope: coefficients with
/// index q < lifter_cutoff_index are kept, the rest are zeroed.
std::size_t lifter_cutoff_index(double cutoff_ms, int sample_rate);

/// Lifter weights for quefrencies 0..n-1.
std::vector<double> lag_window(std::size_t n, std::size_t cutoff_index, LifterShape shape);

/// Real cepstrum of a one-sided log spectrum of K = fft/2 + 1 bins, computed
/// from its even extension. Returns quefrencies 0..K-1.
std::vector<double> real_cepstrum(std::span<const double> log_spectrum);

/// Splits each frame as |X| = envelope * fine. The envelope is the exp of the
/// liftered real cepstrum of log(max(|X|, floor)); the fine structure is the
/// exact residual, so their product reproduces the floored input.
Separation lag_window_separate(const Spectrogram& spec, const SeparationOptions& opts = {});

/// Elementwise product; the result inherits the envelope's analysis config.
Spectrogram recombine(const SpectralEnvelope& env, const FineStructure& fine);

/// max(|X|, kMagnitudeFloor) elementwise.
Spectrogram floor_magnitudes(const Spectrogram& spec);

}  // namespace psforge
