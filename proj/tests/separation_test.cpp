#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "psforge/separation.hpp"
#include "testing/oracles.hpp"
#include "testing/signals.hpp"

namespace psforge {
namespace {

double max_relative_error(const Matrix& got, const Matrix& want) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.data().size(); ++i) {
    worst = std::max(worst, std::abs(got.data()[i] - want.data()[i]) / std::abs(want.data()[i]));
  }
  return worst;
}

std::vector<double> log_row(const Matrix& m, std::size_t t) {
  std::vector<double> out(m.cols());
  for (std::size_t k = 0; k < m.cols(); ++k) out[k] = std::log(m(t, k));
  return out;
}

TEST(Separation, CutoffIndexIsTwoMillisecondsOfSamples) {
  EXPECT_EQ(lifter_cutoff_index(2.0, 24000), 48u);
  EXPECT_EQ(lifter_cutoff_index(1.0, 16000), 16u);
  EXPECT_THROW(lifter_cutoff_index(0.0, 24000), InvalidInput);
  EXPECT_THROW(lifter_cutoff_index(-1.0, 24000), InvalidInput);
  EXPECT_THROW(lifter_cutoff_index(0.01, 24000), InvalidInput);
}

TEST(Separation, LagWindowShapes) {
  const auto rect = lag_window(513, 48, LifterShape::kRectangular);
  const auto hann = lag_window(513, 48, LifterShape::kHann);
  for (std::size_t q = 0; q < 513; ++q) {
    EXPECT_EQ(rect[q], q < 48 ? 1.0 : 0.0);
    if (q >= 48) EXPECT_EQ(hann[q], 0.0);
  }
  EXPECT_DOUBLE_EQ(hann[0], 1.0);
  EXPECT_NEAR(hann[24], 0.5, 1e-15);
  EXPECT_GT(hann[47], 0.0);
  for (std::size_t q = 1; q < 48; ++q) EXPECT_LT(hann[q], hann[q - 1]);
}

TEST(Separation, CepstrumMatchesDirectSum) {
  std::mt19937 rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  for (std::size_t k : {2u, 3u, 17u, 33u, 129u}) {
    std::vector<double> log_spec(k);
    for (double& v : log_spec) v = n(rng);
    const auto got = real_cepstrum(log_spec);
    const auto want = testing::direct_real_cepstrum(log_spec);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t q = 0; q < k; ++q) EXPECT_NEAR(got[q], want[q], 1e-12) << "K " << k;
  }
}

TEST(Separation, FlatSpectrumIsAllEnvelope) {
  for (double c : {1e-3, 1.0, 42.0}) {
    Spectrogram spec{Matrix(4, 513, c), StftConfig{}, 24000};
    const auto parts = lag_window_separate(spec);
    for (double e : parts.envelope.values.data()) EXPECT_NEAR(e, c, 1e-12 * c);
    for (double f : parts.fine.values.data()) EXPECT_NEAR(f, 1.0, 1e-12);
  }
}

TEST(Separation, PulseTrainHarmonicsStayInFineStructure) {
  const auto wave = testing::pulse_train(200.0, 0.5);
  const auto spec = stft_magnitude(wave, StftConfig{});
  const auto parts = lag_window_separate(spec);
  const std::size_t t = spec.frames() / 2;
  const auto fine = log_row(parts.fine.values, t);
  const double bin_hz = spec.bin_hz();

  // Every harmonic up to 10 kHz is a local maximum within one bin of h * 200 Hz.
  for (int h = 1; h * 200.0 <= 10000.0; ++h) {
    const auto nearest = static_cast<std::size_t>(std::lround(h * 200.0 / bin_hz));
    std::size_t best = nearest - 1;
    for (std::size_t k = nearest - 1; k <= nearest + 1; ++k) {
      if (fine[k] > fine[best]) best = k;
    }
    EXPECT_GT(fine[best], fine[best - 1]) << "harmonic " << h;
    EXPECT_GT(fine[best], fine[best + 1]) << "harmonic " << h;
    EXPECT_GT(fine[best], 0.0) << "harmonic " << h;
  }
  EXPECT_NEAR(testing::harmonic_spacing_hz(fine, bin_hz, 100.0, 10000.0), 200.0, 2.0);

  // The 5 ms pitch period sits at quefrency 120: strong in the input cepstrum,
  // absent from the envelope's.
  const auto in_cep = testing::direct_real_cepstrum(log_row(floor_magnitudes(spec).magnitudes, t));
  const auto env_cep = testing::direct_real_cepstrum(log_row(parts.envelope.values, t));
  EXPECT_GT(std::abs(in_cep[120]), 0.05);
  EXPECT_LT(std::abs(env_cep[120]), 1e-10);
}

TEST(Separation, RoundTripIsExactOnFlooredInput) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = testing::random_spectrogram(12, 256, rng);
    SeparationOptions opts;
    opts.lifter_cutoff_ms = 1.0 + trial % 5;
    opts.shape = trial % 2 ? LifterShape::kHann : LifterShape::kRectangular;
    const auto parts = lag_window_separate(spec, opts);
    const auto back = recombine(parts.envelope, parts.fine);
    EXPECT_LT(max_relative_error(back.magnitudes, floor_magnitudes(spec).magnitudes), 1e-9);
    for (double e : parts.envelope.values.data()) EXPECT_TRUE(e > 0.0 && std::isfinite(e));
    for (double f : parts.fine.values.data()) EXPECT_TRUE(f > 0.0 && std::isfinite(f));
  }
}

TEST(Separation, EnvelopeCepstrumVanishesAboveCutoff) {
  std::mt19937 rng(23);
  for (auto shape : {LifterShape::kRectangular, LifterShape::kHann}) {
    const auto spec = testing::random_spectrogram(6, 256, rng);
    SeparationOptions opts;
    opts.shape = shape;
    const auto parts = lag_window_separate(spec, opts);
    const std::size_t cut = lifter_cutoff_index(opts.lifter_cutoff_ms, spec.sample_rate);
    for (std::size_t t = 0; t < spec.frames(); ++t) {
      const auto cep = testing::direct_real_cepstrum(log_row(parts.envelope.values, t));
      for (std::size_t q = cut; q < cep.size(); ++q) ASSERT_LT(std::abs(cep[q]), 1e-10) << q;
    }
  }
}

TEST(Separation, ZeroFramesAreFloored) {
  Spectrogram spec{Matrix(3, 513, 0.0), StftConfig{}, 24000};
  const auto parts = lag_window_separate(spec);
  for (double e : parts.envelope.values.data()) EXPECT_NEAR(e, kMagnitudeFloor, 1e-22);
  for (double f : parts.fine.values.data()) EXPECT_NEAR(f, 1.0, 1e-9);
}

TEST(Separation, FramePermutationCommutes) {
  std::mt19937 rng(5);
  const auto spec = testing::random_spectrogram(9, 512, rng);
  std::vector<std::size_t> order(spec.frames());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Spectrogram shuffled = spec;
  for (std::size_t t = 0; t < order.size(); ++t) {
    std::ranges::copy(spec.magnitudes.row(order[t]), shuffled.magnitudes.row(t).begin());
  }
  const auto a = lag_window_separate(spec);
  const auto b = lag_window_separate(shuffled);
  for (std::size_t t = 0; t < order.size(); ++t) {
    for (std::size_t k = 0; k < spec.bins(); ++k) {
      ASSERT_EQ(b.envelope.values(t, k), a.envelope.values(order[t], k));
      ASSERT_EQ(b.fine.values(t, k), a.fine.values(order[t], k));
    }
  }
}

TEST(Recombine, IdentityFactors) {
  std::mt19937 rng(9);
  const auto spec = testing::random_spectrogram(5, 64, rng);
  SpectralEnvelope ones{Matrix(5, 33, 1.0), 2.0, spec.config, spec.sample_rate};
  FineStructure f{spec.magnitudes};
  EXPECT_EQ(recombine(ones, f).magnitudes, spec.magnitudes);

  SpectralEnvelope e{spec.magnitudes, 2.0, spec.config, spec.sample_rate};
  const auto out = recombine(e, FineStructure{Matrix(5, 33, 1.0)});
  EXPECT_EQ(out.magnitudes, spec.magnitudes);
  EXPECT_EQ(out.config.fft_size, spec.config.fft_size);
  EXPECT_EQ(out.sample_rate, spec.sample_rate);
}

TEST(Recombine, RejectsShapeMismatch) {
  SpectralEnvelope e{Matrix(4, 33, 1.0)};
  EXPECT_THROW(recombine(e, FineStructure{Matrix(4, 32, 1.0)}), InvalidInput);
  EXPECT_THROW(recombine(e, FineStructure{Matrix(5, 33, 1.0)}), InvalidInput);
}

TEST(Separation, RejectsBadInput) {
  Spectrogram spec{Matrix(2, 513, 1.0), StftConfig{}, 24000};
  Spectrogram bad = spec;
  bad.magnitudes(1, 7) = NAN;
  EXPECT_THROW(lag_window_separate(bad), InvalidInput);
  bad.magnitudes(1, 7) = -1.0;
  EXPECT_THROW(lag_window_separate(bad), InvalidInput);
  bad.magnitudes(1, 7) = INFINITY;
  EXPECT_THROW(lag_window_separate(bad), InvalidInput);

  // The default window lasts 40 ms.
  EXPECT_THROW(lag_window_separate(spec, {40.0}), InvalidInput);
  EXPECT_THROW(lag_window_separate(spec, {0.0}), InvalidInput);
  EXPECT_THROW(lag_window_separate(spec, {-2.0}), InvalidInput);
  EXPECT_NO_THROW(lag_window_separate(spec, {20.0}));
  // 30 ms is shorter than the window but needs 720 of only 513 quefrencies.
  EXPECT_THROW(lag_window_separate(spec, {30.0}), InvalidInput);

  // 2 ms is 48 quefrency samples, more than a 64-point spectrum holds.
  Spectrogram small{Matrix(2, 33, 1.0), StftConfig{64, 16, 64}, 24000};
  EXPECT_THROW(lag_window_separate(small), InvalidInput);
  EXPECT_NO_THROW(lag_window_separate(small, {1.0}));
}

}  // namespace
}  // namespace psforge
