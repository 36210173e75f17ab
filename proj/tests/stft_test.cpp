#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "psforge/stft.hpp"
#include "testing/oracles.hpp"
#include "testing/signals.hpp"

namespace psforge {
namespace {

using testing::brute_force_frame;
using testing::direct_dft_magnitudes;

std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

TEST(Stft, ZeroWaveformGivesZeroSpectrogram) {
  for (const StftConfig cfg : {StftConfig{}, StftConfig{64, 16, 128}, StftConfig{8, 8, 8}}) {
    const auto spec = stft_magnitude(testing::silence(0.05), cfg);
    ASSERT_GT(spec.frames(), 0u);
    for (double v : spec.magnitudes.data()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Stft, KiloHertzSineLandsInBin43) {
  const auto wave = testing::sine(1000.0, 0.5, 1.0);
  const auto spec = stft_magnitude(wave, StftConfig{});
  ASSERT_EQ(spec.bins(), 513u);
  // Frames reading reflected padding see a distorted tone; all others are exact.
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    const bool interior = t * 120 >= 480 && t * 120 + 480 <= wave.samples.size();
    const auto bin = static_cast<long>(argmax(spec.magnitudes.row(t)));
    if (interior) {
      EXPECT_EQ(bin, 43) << "frame " << t;
    } else {
      EXPECT_LE(std::abs(bin - 43), 1) << "frame " << t;
    }
  }
  // The direct DFT of one interior frame peaks in the same bin.
  const auto ref = brute_force_frame(wave.samples, 960, 120, 1024, 40);
  EXPECT_EQ(argmax(ref), 43u);
}

TEST(Stft, OneSecondHas201Frames) {
  const auto spec = stft_magnitude(testing::sine(440.0, 1.0), StftConfig{});
  EXPECT_EQ(spec.frames(), 201u);
  EXPECT_EQ(testing::enumerate_frames(24000, 960, 120), 201u);
}

TEST(Stft, FrameCountMatchesEnumerator) {
  for (std::size_t len : {1u, 3u, 7u, 100u, 959u, 960u, 961u, 1234u, 24000u}) {
    for (const StftConfig cfg : {StftConfig{}, StftConfig{32, 8, 32}, StftConfig{31, 5, 64},
                                 StftConfig{16, 16, 16}}) {
      EXPECT_EQ(frame_count(len, cfg),
                testing::enumerate_frames(len, cfg.window_length, cfg.hop_length))
          << "len " << len << " window " << cfg.window_length;
    }
  }
}

TEST(Stft, ReflectIndexMatchesExplicitPadding) {
  for (std::size_t len : {1u, 2u, 3u, 5u, 17u, 40u}) {
    std::vector<double> x(len);
    for (std::size_t i = 0; i < len; ++i) x[i] = static_cast<double>(i);
    for (std::size_t pad : {0u, 1u, 4u, 16u, 48u}) {
      const auto padded = testing::reflect_pad(x, pad);
      for (std::size_t j = 0; j < padded.size(); ++j) {
        EXPECT_EQ(static_cast<double>(reflect_index(static_cast<std::ptrdiff_t>(j), pad, len)),
                  padded[j])
            << "len " << len << " pad " << pad << " j " << j;
      }
    }
  }
}

TEST(Stft, HannWindowIsPeriodic) {
  const auto w = make_window(WindowFunction::kHann, 960);
  const auto ref = testing::reference_hann(960);
  for (std::size_t n = 0; n < w.size(); ++n) EXPECT_NEAR(w[n], ref[n], 1e-15);
  EXPECT_EQ(w[0], 0.0);
  EXPECT_DOUBLE_EQ(w[480], 1.0);
}

TEST(Stft, FramesMatchDirectDft) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> len_dist(1, 300);
  const StftConfig configs[] = {{16, 4, 16}, {32, 8, 32}, {32, 8, 64}, {24, 6, 32}, {64, 16, 64}};
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> x(len_dist(rng));
    for (double& v : x) v = amp(rng);
    const auto& cfg = configs[trial % std::size(configs)];
    const auto spec = stft_magnitude(x, cfg, 24000);
    ASSERT_EQ(spec.frames(), testing::enumerate_frames(x.size(), cfg.window_length, cfg.hop_length));
    for (std::size_t t = 0; t < spec.frames(); ++t) {
      const auto ref = brute_force_frame(x, cfg.window_length, cfg.hop_length, cfg.fft_size, t);
      const double scale = std::max(1.0, *std::max_element(ref.begin(), ref.end()));
      for (std::size_t k = 0; k < ref.size(); ++k) {
        EXPECT_NEAR(spec.magnitudes(t, k), ref[k], 1e-9 * scale)
            << "trial " << trial << " frame " << t << " bin " << k;
      }
    }
  }
}

TEST(Stft, ScalingIsLinear) {
  const auto wave = testing::white_noise(0.2, 0.3, 11);
  const auto base = stft_magnitude(wave, StftConfig{});
  for (double c : {0.01, 0.5, 3.0}) {
    Waveform w = wave;
    for (double& s : w.samples) s *= c;
    const auto out = stft_magnitude(w, StftConfig{});
    ASSERT_TRUE(out.magnitudes.same_shape(base.magnitudes));
    for (std::size_t i = 0; i < out.magnitudes.data().size(); ++i) {
      const double want = c * base.magnitudes.data()[i];
      EXPECT_NEAR(out.magnitudes.data()[i], want, 1e-9 * std::max(want, 1e-12));
    }
  }
}

// A short zero tail only alters frames whose window reaches past the original
// last sample (those read reflected samples before and zeros after); every
// frame supported inside the original signal is untouched.
TEST(Stft, TailPaddingLeavesInteriorFramesAlone) {
  const auto wave = testing::white_noise(0.1, 0.5, 5);
  const StftConfig cfg{};
  const auto base = stft_magnitude(wave, cfg);
  for (std::size_t extra : {1u, 37u, 119u}) {
    Waveform padded = wave;
    padded.samples.resize(wave.samples.size() + extra, 0.0);
    const auto out = stft_magnitude(padded, cfg);
    EXPECT_LE(out.frames() - base.frames(), 1u);
    const std::size_t half = cfg.window_length / 2;
    for (std::size_t t = 0; t < base.frames(); ++t) {
      if (t * cfg.hop_length + half > wave.samples.size()) break;
      for (std::size_t k = 0; k < base.bins(); ++k) {
        ASSERT_EQ(out.magnitudes(t, k), base.magnitudes(t, k)) << "frame " << t;
      }
    }
  }
}

TEST(Stft, RejectsInvalidInput) {
  EXPECT_THROW(stft_magnitude(Waveform{}, StftConfig{}), InvalidInput);
  EXPECT_THROW(stft_magnitude(Waveform{{0.1, 1.5}}, StftConfig{}), InvalidInput);
  EXPECT_THROW(stft_magnitude(Waveform{{0.1, NAN}}, StftConfig{}), InvalidInput);
  EXPECT_THROW(stft_magnitude(Waveform{{0.1}, 0}, StftConfig{}), InvalidInput);
  const Waveform ok{{0.0, 0.1, 0.2}};
  EXPECT_THROW(stft_magnitude(ok, StftConfig{960, 0, 1024}), InvalidInput);
  EXPECT_THROW(stft_magnitude(ok, StftConfig{960, 961, 1024}), InvalidInput);
  EXPECT_THROW(stft_magnitude(ok, StftConfig{960, 120, 512}), InvalidInput);
  EXPECT_THROW(stft_magnitude(ok, StftConfig{960, 120, 1000}), InvalidInput);
}

TEST(SequenceStft, ConstantSequenceIsDc) {
  const std::vector<double> seq(256, 5.3);
  for (const ResolutionSpec res : {ResolutionSpec{32, 32, 8}, ResolutionSpec{64, 64, 16},
                                   ResolutionSpec{128, 128, 32}}) {
    const auto spec = magnitude_for_sequence(seq, res);
    EXPECT_EQ(spec.sample_rate, 1);
    for (std::size_t t = 0; t < spec.frames(); ++t) {
      const auto row = spec.magnitudes.row(t);
      EXPECT_EQ(argmax(row), 0u);
      // A periodic Hann window has exactly two nonzero DFT coefficients, so
      // bin 1 keeps half the DC value and everything above is empty.
      EXPECT_NEAR(row[1], 0.5 * row[0], 1e-9 * row[0]);
      for (std::size_t k = 2; k < row.size(); ++k) EXPECT_NEAR(row[k], 0.0, 1e-9 * row[0]);
    }
  }
}

TEST(SequenceStft, Period16SineHitsBin2) {
  std::vector<double> seq(160);
  for (std::size_t n = 0; n < seq.size(); ++n) seq[n] = std::sin(2.0 * M_PI * n / 16.0);
  const auto spec = magnitude_for_sequence(seq, {32, 32, 8});
  for (std::size_t t = 2; t * 8 + 16 <= seq.size(); ++t) {
    EXPECT_EQ(argmax(spec.magnitudes.row(t)), 2u) << "frame " << t;
  }
  std::vector<double> frame(32);
  const auto hann = testing::reference_hann(32);
  for (std::size_t n = 0; n < 32; ++n) frame[n] = seq[n + 16] * hann[n];
  EXPECT_EQ(argmax(direct_dft_magnitudes(frame, 32)), 2u);
}

TEST(SequenceStft, RejectsShortOrNonFiniteSequences) {
  EXPECT_THROW(magnitude_for_sequence(std::vector<double>(31, 1.0), {32, 32, 8}), InvalidInput);
  EXPECT_NO_THROW(magnitude_for_sequence(std::vector<double>(32, 1.0), {32, 32, 8}));
  std::vector<double> bad(64, 1.0);
  bad[10] = INFINITY;
  EXPECT_THROW(magnitude_for_sequence(bad, {32, 32, 8}), InvalidInput);
}

TEST(Stft, ConcurrentCallsAgree) {
  const auto wave = testing::harmonic(150.0, 0.3);
  const auto want = stft_magnitude(wave, StftConfig{});
  std::vector<Spectrogram> got(4);
  {
    std::vector<std::jthread> threads;
    for (auto& g : got) threads.emplace_back([&] { g = stft_magnitude(wave, StftConfig{}); });
  }
  for (const auto& g : got) EXPECT_EQ(g.magnitudes, want.magnitudes);
}

}  // namespace
}  // namespace psforge
