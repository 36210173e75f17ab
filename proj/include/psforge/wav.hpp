#pragma once

#include <filesystem>

#include "psforge/stft.hpp"

namespace psforge {

struct WavReadOptions {
  int expected_sample_rate = kDefaultSampleRate;
  bool resample = false;  // linear resampling instead of rejecting other rates
};

/// Reads a 16-bit PCM mono RIFF/WAVE file. Files at a rate other than
/// expected_sample_rate are rejected with InvalidInput unless `resample` is set.
Waveform read_wav(const std::filesystem::path& path, const WavReadOptions& opts = {});

/// Writes 16-bit PCM mono; samples are clipped to [-1, 1] and rounded.
void write_wav(const std::filesystem::path& path, const Waveform& wave);

/// Linear-interpolation resampler.
Waveform resample_linear(const Waveform& wave, int target_rate);

}  // namespace psforge
