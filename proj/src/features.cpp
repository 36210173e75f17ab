#include "psforge/features.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace psforge {

// ---------------------------------------------------------------------------
// Log-Mel

void validate(const MelConfig& mel, int sample_rate) {
  if (mel.n_mels == 0) throw InvalidInput("n_mels must be positive");
  if (!(mel.fmin >= 0.0) || !(mel.fmin < mel.fmax) ||
      mel.fmax > 0.5 * static_cast<double>(sample_rate)) {
    throw InvalidInput("Mel range must satisfy 0 <= fmin < fmax <= sample_rate / 2");
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(const MelConfig& mel, int sample_rate, std::size_t fft_size) {
  validate(mel, sample_rate);
  const std::size_t n_bins = fft_size / 2 + 1;
  const double lo = hz_to_mel(mel.fmin);
  const double hi = hz_to_mel(mel.fmax);
  std::vector<double> edges(mel.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) /
                                  static_cast<double>(mel.n_mels + 1));
  }

  Matrix fb(mel.n_mels, n_bins);
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(fft_size);
  for (std::size_t m = 0; m < mel.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    const double gain =
        mel.normalization == MelNormalization::kArea ? 2.0 / (right - left) : 1.0;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      fb(m, k) = gain * w;
    }
  }
  return fb;
}

Matrix log_mel(const Spectrogram& spec, const MelConfig& mel) {
  const Matrix fb = mel_filterbank(mel, spec.sample_rate, spec.config.fft_size);
  if (fb.cols() != spec.bins()) throw InvalidInput("spectrogram bin count does not match fft_size");
  Matrix out(spec.frames(), mel.n_mels);
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    const auto mag = spec.magnitudes.row(t);
    for (std::size_t m = 0; m < mel.n_mels; ++m) {
      const auto w = fb.row(m);
      double acc = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * mag[k];
      out(t, m) = std::log(std::max(acc, kLogMelFloor));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// F0 extraction

AutocorrelationF0Extractor::AutocorrelationF0Extractor(AutocorrelationF0Options opts)
    : opts_(opts) {
  if (!(opts_.fmin > 0.0) || !(opts_.fmin < opts_.fmax)) {
    throw InvalidInput("F0 search range must satisfy 0 < fmin < fmax");
  }
  validate(opts_.framing);
}

F0Contour AutocorrelationF0Extractor::extract(const Waveform& wave) const {
  validate(wave);
  const int sr = wave.sample_rate;
  if (opts_.fmax > 0.5 * sr) throw InvalidInput("F0 fmax exceeds Nyquist");
  const auto& x = wave.samples;
  const std::size_t len = x.size();

  const auto min_lag = static_cast<std::size_t>(std::max(2.0, std::floor(sr / opts_.fmax)));
  const auto max_lag = static_cast<std::size_t>(std::ceil(sr / opts_.fmin));
  const auto compare = static_cast<std::size_t>(std::round(opts_.comparison_ms * 1e-3 * sr));
  const std::size_t segment = compare + max_lag + 1;

  F0Contour out;
  out.hop_length = opts_.framing.hop_length;
  out.sample_rate = sr;
  const std::size_t n_frames = frame_count(len, opts_.framing);
  std::vector<double> raw(n_frames, 0.0);

  auto at = [&](std::size_t i) { return i < len ? x[i] : 0.0; };
  std::vector<double> ncc(max_lag + 2, 0.0);

  for (std::size_t t = 0; t < n_frames; ++t) {
    // Segments near the edges are moved inward rather than padded.
    const auto center = static_cast<std::ptrdiff_t>(t * out.hop_length);
    std::ptrdiff_t start = center - static_cast<std::ptrdiff_t>(segment / 2);
    if (len >= segment) {
      start = std::clamp<std::ptrdiff_t>(start, 0, static_cast<std::ptrdiff_t>(len - segment));
    } else {
      start = 0;
    }
    const auto s = static_cast<std::size_t>(start);

    double e0 = 0.0;
    for (std::size_t n = 0; n < compare; ++n) e0 += at(s + n) * at(s + n);
    if (std::sqrt(e0 / static_cast<double>(compare)) < opts_.silence_rms) continue;

    double etau = 0.0;
    for (std::size_t n = 0; n < compare; ++n) etau += at(s + min_lag - 1 + n) * at(s + min_lag - 1 + n);
    for (std::size_t lag = min_lag - 1; lag <= max_lag + 1; ++lag) {
      if (lag > min_lag - 1) {
        const double out_sample = at(s + lag - 1);
        const double in_sample = at(s + lag + compare - 1);
        etau += in_sample * in_sample - out_sample * out_sample;
      }
      double num = 0.0;
      for (std::size_t n = 0; n < compare; ++n) num += at(s + n) * at(s + n + lag);
      const double den = std::sqrt(e0 * std::max(etau, 0.0));
      ncc[lag] = den > 0.0 ? num / den : 0.0;
    }

    double best = -1.0;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
      if (ncc[lag] >= ncc[lag - 1] && ncc[lag] >= ncc[lag + 1]) best = std::max(best, ncc[lag]);
    }
    if (best < opts_.voicing_threshold) continue;

    std::size_t chosen = 0;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
      if (ncc[lag] >= ncc[lag - 1] && ncc[lag] >= ncc[lag + 1] &&
          ncc[lag] >= opts_.octave_tolerance * best) {
        chosen = lag;
        break;
      }
    }
    const double ym = ncc[chosen - 1], y0 = ncc[chosen], yp = ncc[chosen + 1];
    const double curvature = ym - 2.0 * y0 + yp;
    double offset = curvature < 0.0 ? 0.5 * (ym - yp) / curvature : 0.0;
    offset = std::clamp(offset, -0.5, 0.5);
    const double f0 = sr / (static_cast<double>(chosen) + offset);
    if (f0 >= opts_.fmin && f0 <= opts_.fmax) raw[t] = f0;
  }

  out.values = raw;
  const std::size_t half = opts_.median_length / 2;
  if (opts_.median_length > 1 && n_frames >= opts_.median_length) {
    std::vector<double> win(opts_.median_length);
    for (std::size_t t = half; t + half < n_frames; ++t) {
      std::copy(raw.begin() + static_cast<std::ptrdiff_t>(t - half),
                raw.begin() + static_cast<std::ptrdiff_t>(t + half + 1), win.begin());
      std::nth_element(win.begin(), win.begin() + static_cast<std::ptrdiff_t>(half), win.end());
      out.values[t] = win[half];
    }
  }
  out.vuv.resize(n_frames);
  for (std::size_t t = 0; t < n_frames; ++t) out.vuv[t] = out.values[t] > 0.0;
  return out;
}

F0Contour extract_f0(const Waveform& wave, double fmin, double fmax) {
  AutocorrelationF0Options opts;
  opts.fmin = fmin;
  opts.fmax = fmax;
  return AutocorrelationF0Extractor(opts).extract(wave);
}

// ---------------------------------------------------------------------------
// Continuous log F0

ContinuousLogF0 continuize_log_f0(const F0Contour& contour) {
  const std::size_t n = contour.values.size();
  if (contour.vuv.size() != n) throw InvalidInput("F0 and V/UV lengths differ");
  std::vector<std::size_t> voiced;
  for (std::size_t t = 0; t < n; ++t) {
    const bool v = contour.vuv[t];
    if (v != (contour.values[t] > 0.0) || !std::isfinite(contour.values[t])) {
      throw InvalidInput("F0 contour inconsistent with V/UV at frame " + std::to_string(t));
    }
    if (v) voiced.push_back(t);
  }
  if (voiced.empty()) throw InvalidInput("F0 contour has no voiced frames");

  ContinuousLogF0 out{std::vector<double>(n)};
  for (std::size_t t : voiced) out.values[t] = std::log(contour.values[t]);
  for (std::size_t t = 0; t < voiced.front(); ++t) out.values[t] = out.values[voiced.front()];
  for (std::size_t t = voiced.back() + 1; t < n; ++t) out.values[t] = out.values[voiced.back()];
  for (std::size_t i = 0; i + 1 < voiced.size(); ++i) {
    const std::size_t a = voiced[i], b = voiced[i + 1];
    const double la = out.values[a], lb = out.values[b];
    for (std::size_t t = a + 1; t < b; ++t) {
      const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
      out.values[t] = la + w * (lb - la);
    }
  }
  return out;
}

double log_f0_offset(double semitones) {
  if (!std::isfinite(semitones)) throw InvalidInput("semitone shift must be finite");
  return semitones / 12.0 * std::numbers::ln2;
}

ContinuousLogF0 shift_continuous_log_f0(const ContinuousLogF0& clf0, double semitones) {
  const double offset = log_f0_offset(semitones);
  ContinuousLogF0 out = clf0;
  for (double& v : out.values) {
    if (!std::isfinite(v)) throw InvalidInput("continuous log F0 must be finite");
    v += offset;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

FeatureMatrix assemble_features(const Matrix& mel, const ContinuousLogF0& clf0,
                                const std::vector<bool>& vuv, FeatureMetadata meta) {
  if (mel.cols() != kMelBands) {
    throw InvalidInput("expected " + std::to_string(kMelBands) + " Mel bands, got " +
                       std::to_string(mel.cols()));
  }
  const std::size_t n = std::min({mel.rows(), clf0.frames(), vuv.size()});
  const std::size_t longest = std::max({mel.rows(), clf0.frames(), vuv.size()});
  if (longest - n > 2) {
    throw InvalidInput("frame counts differ too much (mel " + std::to_string(mel.rows()) +
                       ", log F0 " + std::to_string(clf0.frames()) + ", V/UV " +
                       std::to_string(vuv.size()) + ")");
  }
  if (longest != n) {
    spdlog::warn("trimming features of '{}' from {} to {} frames", meta.utterance_id, longest, n);
  }

  FeatureMatrix fm{Matrix(n, kFeatureDims), std::move(meta)};
  for (std::size_t t = 0; t < n; ++t) {
    const auto src = mel.row(t);
    auto dst = fm.values.row(t);
    std::copy(src.begin(), src.end(), dst.begin());
    dst[kLogF0Column] = clf0.values[t];
    dst[kVuvColumn] = vuv[t] ? 1.0 : 0.0;
  }
  validate(fm);
  return fm;
}

void validate(const FeatureMatrix& fm) {
  if (fm.values.cols() != kFeatureDims) {
    throw InvalidInput("feature matrix must have " + std::to_string(kFeatureDims) + " columns");
  }
  for (std::size_t t = 0; t < fm.values.rows(); ++t) {
    const auto row = fm.values.row(t);
    for (double v : row) {
      if (!std::isfinite(v)) throw InvalidInput("non-finite feature at frame " + std::to_string(t));
    }
    if (row[kVuvColumn] != 0.0 && row[kVuvColumn] != 1.0) {
      throw InvalidInput("V/UV column is not binary at frame " + std::to_string(t));
    }
  }
}

// ---------------------------------------------------------------------------
// Normalization

ZeroVarianceError::ZeroVarianceError(std::size_t dimension)
    : InvalidInput("feature dimension " + std::to_string(dimension) + " has zero variance"),
      dimension_(dimension) {}

NormAccumulator::NormAccumulator(std::size_t dims)
    : dims_(dims), mean_(dims, 0.0), m2_(dims, 0.0) {}

void NormAccumulator::add(const Matrix& values) {
  if (values.cols() != dims_) throw InvalidInput("feature dimension mismatch");
  if (values.rows() == 0) return;
  NormAccumulator part(dims_);
  part.count_ = values.rows();
  const double n = static_cast<double>(values.rows());
  for (std::size_t t = 0; t < values.rows(); ++t) {
    const auto row = values.row(t);
    for (std::size_t d = 0; d < dims_; ++d) part.mean_[d] += row[d];
  }
  for (double& m : part.mean_) m /= n;
  for (std::size_t t = 0; t < values.rows(); ++t) {
    const auto row = values.row(t);
    for (std::size_t d = 0; d < dims_; ++d) {
      const double dev = row[d] - part.mean_[d];
      part.m2_[d] += dev * dev;
    }
  }
  merge(part);
}

void NormAccumulator::merge(const NormAccumulator& other) {
  if (other.dims_ != dims_) throw InvalidInput("feature dimension mismatch");
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (std::size_t d = 0; d < dims_; ++d) {
    const double delta = other.mean_[d] - mean_[d];
    mean_[d] += delta * nb / n;
    m2_[d] += other.m2_[d] + delta * delta * na * nb / n;
  }
  count_ += other.count_;
}

NormStats NormAccumulator::finish() const {
  if (count_ < 2) throw InvalidInput("normalization statistics need at least two frames");
  NormStats stats{mean_, std::vector<double>(dims_), count_};
  for (std::size_t d = 0; d < dims_; ++d) {
    stats.std[d] = std::sqrt(m2_[d] / static_cast<double>(count_));
    if (!(stats.std[d] > 0.0) && d != kVuvColumn) throw ZeroVarianceError(d);
  }
  return stats;
}

NormStats compute_norm_stats(std::span<const FeatureMatrix> features) {
  NormAccumulator acc;
  for (const auto& fm : features) acc.add(fm.values);
  return acc.finish();
}

namespace {

void check_stats(const FeatureMatrix& fm, const NormStats& stats) {
  if (stats.mean.size() != fm.values.cols() || stats.std.size() != fm.values.cols()) {
    throw InvalidInput("normalization stats have " + std::to_string(stats.mean.size()) +
                       " dimensions, features have " + std::to_string(fm.values.cols()));
  }
  for (std::size_t d = 0; d < stats.std.size(); ++d) {
    if (d != kVuvColumn && !(stats.std[d] > 0.0)) throw ZeroVarianceError(d);
  }
}

}  // namespace

FeatureMatrix normalize(const FeatureMatrix& fm, const NormStats& stats) {
  check_stats(fm, stats);
  FeatureMatrix out = fm;
  for (std::size_t t = 0; t < out.values.rows(); ++t) {
    auto row = out.values.row(t);
    for (std::size_t d = 0; d < row.size(); ++d) {
      if (d != kVuvColumn) row[d] = (row[d] - stats.mean[d]) / stats.std[d];
    }
  }
  return out;
}

FeatureMatrix denormalize(const FeatureMatrix& fm, const NormStats& stats) {
  check_stats(fm, stats);
  FeatureMatrix out = fm;
  for (std::size_t t = 0; t < out.values.rows(); ++t) {
    auto row = out.values.row(t);
    for (std::size_t d = 0; d < row.size(); ++d) {
      if (d != kVuvColumn) row[d] = row[d] * stats.std[d] + stats.mean[d];
    }
  }
  return out;
}

}  // namespace psforge
