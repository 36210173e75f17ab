#include "psforge/pitchshift.hpp"

#include <cmath>
#include <vector>

namespace psforge {

double semitone_to_ratio(double semitones) {
  if (!std::isfinite(semitones)) throw InvalidInput("semitone shift must be finite");
  return std::exp2(semitones / 12.0);
}

FineStructure stretch_fine_structure(const FineStructure& fine, double alpha,
                                     OutOfRange policy) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidInput("stretch ratio must be positive");
  }
  const std::size_t n_bins = fine.values.cols();
  FineStructure out{Matrix(fine.values.rows(), n_bins)};
  if (n_bins < 2) return {fine.values};
  const double last = static_cast<double>(n_bins - 1);

  std::vector<double> log_src(n_bins);
  for (std::size_t t = 0; t < fine.values.rows(); ++t) {
    const auto src = fine.values.row(t);
    for (std::size_t k = 0; k < n_bins; ++k) log_src[k] = std::log(src[k]);
    auto dst = out.values.row(t);

    for (std::size_t j = 0; j < n_bins; ++j) {
      double pos = static_cast<double>(j) / alpha;
      if (pos > last) {
        if (policy == OutOfRange::kClamp) {
          dst[j] = src[n_bins - 1];
          continue;
        }
        if (policy == OutOfRange::kUnity) {
          dst[j] = 1.0;
          continue;
        }
        // Reflect about the top bin, bouncing off both ends.
        const double period = 2.0 * last;
        pos = std::fmod(pos, period);
        if (pos > last) pos = period - pos;
      }
      const auto i0 = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(i0);
      if (frac == 0.0 || i0 + 1 >= n_bins) {
        dst[j] = src[i0];
      } else {
        dst[j] = std::exp((1.0 - frac) * log_src[i0] + frac * log_src[i0 + 1]);
      }
    }
  }
  return out;
}

Spectrogram pitch_shift_separated(const Separation& parts, double semitones,
                                  OutOfRange policy) {
  const double alpha = semitone_to_ratio(semitones);
  return recombine(parts.envelope, stretch_fine_structure(parts.fine, alpha, policy));
}

Spectrogram pitch_shift_spectrogram(const Spectrogram& spec, double semitones,
                                    const PitchShiftOptions& opts) {
  semitone_to_ratio(semitones);  // validate before the expensive part
  return pitch_shift_separated(lag_window_separate(spec, opts.separation), semitones,
                               opts.out_of_range);
}

}  // namespace psforge
