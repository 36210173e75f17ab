#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "psforge/common.hpp"

namespace psforge {

inline constexpr int kDefaultSampleRate = 24000;

/// Mono PCM signal as doubles in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;
  int bit_depth_origin = 16;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Throws InvalidInput for a non-positive rate, empty signal, non-finite or
/// out-of-range amplitudes.
void validate(const Waveform& wave);

enum class WindowFunction { kHann, kRectangular };

struct StftConfig {
  std::size_t window_length = 960;  // 40 ms at 24 kHz
  std::size_t hop_length = 120;     // 5 ms at 24 kHz
  std::size_t fft_size = 1024;
  WindowFunction window = WindowFunction::kHann;

  std::size_t bins() const { return fft_size / 2 + 1; }
};

/// 0 < hop <= window <= fft, fft a power of two.
void validate(const StftConfig& cfg);

/// Frame geometry of the small-scale STFTs run over F0 contours.
struct ResolutionSpec {
  std::size_t fft_size = 0;
  std::size_t window_size = 0;
  std::size_t hop_size = 0;

  StftConfig to_stft_config() const {
    return {window_size, hop_size, fft_size, WindowFunction::kHann};
  }
  friend bool operator==(const ResolutionSpec&, const ResolutionSpec&) = default;
};

/// Magnitude spectrogram, N frames by K = fft_size/2 + 1 bins.
struct Spectrogram {
  Matrix magnitudes;
  StftConfig config;
  int sample_rate = kDefaultSampleRate;

  std::size_t frames() const { return magnitudes.rows(); }
  std::size_t bins() const { return magnitudes.cols(); }
  double bin_hz() const {
    return static_cast<double>(sample_rate) / static_cast<double>(config.fft_size);
  }
};

/// Periodic window of the given length.
std::vector<double> make_window(WindowFunction fn, std::size_t length);

/// Number of centered frames for a signal of `length` samples. The signal is
/// padded by window_length/2 on both sides, so frame t is centered on sample
/// t * hop.
std::size_t frame_count(std::size_t length, const StftConfig& cfg);

/// Maps an index into the padded signal (offset by `pad`) back to a sample of
/// a signal of `length` samples using reflection without edge repetition
/// (numpy "reflect"), bouncing as often as needed for short signals.
std::size_t reflect_index(std::ptrdiff_t padded_index, std::size_t pad, std::size_t length);

/// Centered, reflect-padded STFT magnitudes of an arbitrary real sequence.
Spectrogram stft_magnitude(std::span<const double> signal, const StftConfig& cfg,
                           int sample_rate);

Spectrogram stft_magnitude(const Waveform& wave, const StftConfig& cfg);

/// STFT of a per-frame sequence (an F0 contour) at one of the loss
/// resolutions. Requires seq.size() >= res.window_size.
Spectrogram magnitude_for_sequence(std::span<const double> seq, const ResolutionSpec& res);

}  // namespace psforge
