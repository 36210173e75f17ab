#pragma once

#include "psforge/separation.hpp"

namespace psforge {

/// Frequency ratio of a shift by `semitones`: 2^(p/12).
double semitone_to_ratio(double semitones);

struct ShiftSpec {
  double semitones = 0.0;
  double ratio = 1.0;

  static ShiftSpec from_semitones(double p) { return {p, semitone_to_ratio(p)}; }
};

/// What an output bin reads when its source position j/alpha lies above the
/// highest source bin (only possible for alpha < 1).
enum class OutOfRange {
  kClamp,   // value of the highest source bin
  kMirror,  // reflect the source position back below Nyquist
  kUnity,   // 1.0, i.e. no harmonic structure
};

/// Stretches the fine structure along frequency by `alpha` in gather form:
/// output bin j takes the log-domain linear interpolation of the input at
/// position j / alpha. Shape is preserved.
FineStructure stretch_fine_structure(const FineStructure& fine, double alpha,
                                     OutOfRange policy = OutOfRange::kClamp);

struct PitchShiftOptions {
  SeparationOptions separation;
  OutOfRange out_of_range = OutOfRange::kClamp;
};

/// Moves only the harmonic structure: the spectrogram is separated, its fine
/// structure stretched by 2^(p/12), and the result multiplied back onto the
/// unmodified envelope.
Spectrogram pitch_shift_spectrogram(const Spectrogram& spec, double semitones,
                                    const PitchShiftOptions& opts = {});

/// Same as above for a spectrogram that has already been separated.
Spectrogram pitch_shift_separated(const Separation& parts, double semitones,
                                  OutOfRange policy = OutOfRange::kClamp);

}  // namespace psforge
