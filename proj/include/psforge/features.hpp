#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "psforge/stft.hpp"

namespace psforge {

inline constexpr std::size_t kMelBands = 80;
inline constexpr std::size_t kFeatureDims = 82;
inline constexpr std::size_t kLogF0Column = 80;
inline constexpr std::size_t kVuvColumn = 81;
inline constexpr double kLogMelFloor = 1e-10;

// ---------------------------------------------------------------------------
// Log-Mel spectrogram

enum class MelNormalization {
  kArea,  // every triangle integrates to one over Hz
  kPeak,  // every triangle peaks at one
};

struct MelConfig {
  std::size_t n_mels = kMelBands;
  double fmin = 0.0;
  double fmax = 12000.0;
  MelNormalization normalization = MelNormalization::kArea;
};

void validate(const MelConfig& mel, int sample_rate);

/// HTK Mel scale: 2595 log10(1 + f / 700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filterbank of n_mels rows by fft_size/2 + 1 columns. Band edges
/// are n_mels + 2 points equally spaced on the Mel scale over [fmin, fmax].
Matrix mel_filterbank(const MelConfig& mel, int sample_rate, std::size_t fft_size);

/// log(max(filterbank * |X|, kLogMelFloor)) per frame; N x n_mels.
Matrix log_mel(const Spectrogram& spec, const MelConfig& mel = {});

// ---------------------------------------------------------------------------
// F0

struct F0Contour {
  std::vector<double> values;  // Hz, 0 when unvoiced
  std::vector<bool> vuv;
  std::size_t hop_length = 120;
  int sample_rate = kDefaultSampleRate;

  std::size_t frames() const { return values.size(); }
};

/// Pluggable F0 analyzer. Implementations must produce one value per centered
/// STFT frame of the configured hop so contours line up with spectrograms.
class F0Extractor {
 public:
  virtual ~F0Extractor() = default;
  virtual F0Contour extract(const Waveform& wave) const = 0;
};

struct AutocorrelationF0Options {
  double fmin = 70.0;
  double fmax = 500.0;
  StftConfig framing;                // only window_length/hop_length matter
  double comparison_ms = 20.0;       // correlation window
  double voicing_threshold = 0.5;    // minimum normalized correlation
  double octave_tolerance = 0.9;     // earliest peak within this fraction of the best wins
  double silence_rms = 1e-4;
  std::size_t median_length = 3;
};

/// Normalized cross-correlation pitch tracker with parabolic peak refinement
/// and median smoothing.
class AutocorrelationF0Extractor final : public F0Extractor {
 public:
  explicit AutocorrelationF0Extractor(AutocorrelationF0Options opts = {});
  F0Contour extract(const Waveform& wave) const override;
  const AutocorrelationF0Options& options() const { return opts_; }

 private:
  AutocorrelationF0Options opts_;
};

F0Contour extract_f0(const Waveform& wave, double fmin = 70.0, double fmax = 500.0);

/// Natural-log F0 defined at every frame.
struct ContinuousLogF0 {
  std::vector<double> values;
  std::size_t frames() const { return values.size(); }
};

/// log F0 at voiced frames, linear interpolation in log F0 across interior
/// unvoiced gaps, nearest voiced value held across leading/trailing gaps.
ContinuousLogF0 continuize_log_f0(const F0Contour& contour);

/// Log-domain shift of (p / 12) ln 2.
double log_f0_offset(double semitones);
ContinuousLogF0 shift_continuous_log_f0(const ContinuousLogF0& clf0, double semitones);

// ---------------------------------------------------------------------------
// Feature matrices

struct FeatureMetadata {
  std::string utterance_id;
  int sample_rate = kDefaultSampleRate;
  double hop_ms = 5.0;
  double semitone_p = 0.0;
  std::string source_file;
  std::string speaker;
  std::string style;
};

/// N x 82: [0, 80) log-Mel, [80] continuous log F0, [81] V/UV in {0, 1}.
struct FeatureMatrix {
  Matrix values;
  FeatureMetadata meta;

  std::size_t frames() const { return values.rows(); }
};

/// Concatenates the three streams. Lengths that differ by at most two frames
/// are trimmed to the shortest (with a warning); larger mismatches throw.
FeatureMatrix assemble_features(const Matrix& mel, const ContinuousLogF0& clf0,
                                const std::vector<bool>& vuv, FeatureMetadata meta = {});

/// Throws InvalidInput if the matrix does not have 82 finite columns with a
/// binary V/UV column.
void validate(const FeatureMatrix& fm);

// ---------------------------------------------------------------------------
// Normalization

struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;
  std::size_t frames = 0;
};

class ZeroVarianceError : public InvalidInput {
 public:
  explicit ZeroVarianceError(std::size_t dimension);
  std::size_t dimension() const { return dimension_; }

 private:
  std::size_t dimension_;
};

/// Mergeable per-dimension mean/variance accumulator. Each added matrix is
/// reduced with a two-pass pass and folded in with Chan's pairwise update, so
/// results depend only on the order of add/merge calls.
class NormAccumulator {
 public:
  explicit NormAccumulator(std::size_t dims = kFeatureDims);

  void add(const Matrix& values);
  void merge(const NormAccumulator& other);

  std::size_t count() const { return count_; }
  /// Population statistics. The V/UV column is exempt from the zero-variance
  /// check because it is never normalized.
  NormStats finish() const;

 private:
  std::size_t dims_;
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

NormStats compute_norm_stats(std::span<const FeatureMatrix> features);

/// (x - mean) / std on every column except V/UV.
FeatureMatrix normalize(const FeatureMatrix& fm, const NormStats& stats);
FeatureMatrix denormalize(const FeatureMatrix& fm, const NormStats& stats);

}  // namespace psforge
