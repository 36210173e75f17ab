#include "psforge/augment.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <thread>

#include "psforge/feature_io.hpp"
#include "psforge/wav.hpp"

namespace psforge {
namespace fs = std::filesystem;
using nlohmann::json;

std::vector<FeatureMatrix> extract_utterance_features(const Waveform& wave,
                                                      const FeatureMetadata& base,
                                                      const AugmentationPlan& plan,
                                                      std::span<const int> semitones) {
  const Spectrogram spec = stft_magnitude(wave, plan.stft);
  AutocorrelationF0Options f0_opts = plan.f0;
  f0_opts.framing = plan.stft;
  const F0Contour f0 = AutocorrelationF0Extractor(f0_opts).extract(wave);

  ContinuousLogF0 clf0 = continuize_log_f0(f0);
  for (double& v : clf0.values) v = static_cast<double>(static_cast<float>(v));

  FeatureMetadata meta = base;
  meta.sample_rate = wave.sample_rate;
  meta.hop_ms = 1e3 * static_cast<double>(plan.stft.hop_length) / wave.sample_rate;
  meta.semitone_p = 0.0;

  std::vector<FeatureMatrix> out;
  out.reserve(semitones.size() + 1);
  out.push_back(assemble_features(log_mel(spec, plan.mel), clf0, f0.vuv, meta));
  if (semitones.empty()) return out;

  const Separation parts = lag_window_separate(spec, plan.shift.separation);
  for (int p : semitones) {
    const Spectrogram shifted = pitch_shift_separated(parts, p, plan.shift.out_of_range);
    meta.semitone_p = p;
    out.push_back(assemble_features(log_mel(shifted, plan.mel), shift_continuous_log_f0(clf0, p),
                                    f0.vuv, meta));
  }
  return out;
}

fs::path feature_stem(const fs::path& out_dir, const std::string& utterance_id, int semitones) {
  char suffix[16];
  std::snprintf(suffix, sizeof suffix, "_p%+03d", semitones);
  return out_dir / utterance_id / (utterance_id + suffix);
}

json AugmentSummary::to_json() const {
  json fails = json::array();
  for (const auto& f : failures) {
    fails.push_back({{"utterance_id", f.utterance_id}, {"error", f.message}});
  }
  return {{"entries", entries},
          {"expected_files", expected_files},
          {"written", written},
          {"skipped", skipped},
          {"failures", fails}};
}

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PSFORGE_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
    spdlog::warn("ignoring invalid PSFORGE_WORKERS='{}'", env);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct EntryResult {
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::optional<std::string> error;
};

bool complete(const fs::path& stem) {
  const auto paths = FeatureFilePaths::from_stem(stem);
  return fs::is_regular_file(paths.sidecar) && fs::is_regular_file(paths.data);
}

EntryResult process_entry(const CorpusManifest& manifest, const ManifestEntry& entry,
                          const AugmentationPlan& plan, const fs::path& out_dir) {
  EntryResult result;
  const fs::path utt_dir = out_dir / entry.utterance_id;
  const fs::path marker = utt_dir / kPartialMarker;

  std::vector<int> all{0};
  if (plan.augments(entry.split)) all.insert(all.end(), plan.semitones.begin(), plan.semitones.end());

  std::vector<bool> done(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) done[i] = complete(feature_stem(out_dir, entry.utterance_id, all[i]));
  if (std::all_of(done.begin(), done.end(), [](bool b) { return b; })) {
    result.skipped = all.size();
    std::error_code ec;
    fs::remove(marker, ec);
    return result;
  }

  try {
    fs::create_directories(utt_dir);
    const Waveform wave = read_wav(entry.wav_path, {manifest.audio.sample_rate, manifest.audio.resample});
    FeatureMetadata base;
    base.utterance_id = entry.utterance_id;
    base.source_file = entry.wav_path.string();
    base.speaker = entry.speaker;
    base.style = entry.style;
    const std::span<const int> shifts(all.data() + 1, all.size() - 1);
    const auto features = extract_utterance_features(wave, base, plan, shifts);
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (done[i]) {
        ++result.skipped;
        continue;
      }
      write_feature_file(feature_stem(out_dir, entry.utterance_id, all[i]), features[i]);
      ++result.written;
    }
    std::error_code ec;
    fs::remove(marker, ec);
  } catch (const std::exception& e) {
    result.error = e.what();
    std::error_code ec;
    fs::create_directories(utt_dir, ec);
    std::ofstream(marker) << e.what() << "\n";
  }
  return result;
}

}  // namespace

AugmentSummary augment_corpus(const CorpusManifest& manifest, const AugmentationPlan& plan,
                              const fs::path& out_dir, const AugmentOptions& opts) {
  fs::create_directories(out_dir);
  const std::size_t n = manifest.entries.size();
  std::vector<EntryResult> results(n);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      results[i] = process_entry(manifest, manifest.entries[i], plan, out_dir);
      if (results[i].error) {
        spdlog::error("{}: {}", manifest.entries[i].utterance_id, *results[i].error);
      }
    }
  };
  const std::size_t workers = std::min(resolve_workers(opts.workers), std::max<std::size_t>(n, 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }

  AugmentSummary summary;
  summary.entries = n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = manifest.entries[i];
    summary.expected_files += 1 + (plan.augments(e.split) ? plan.semitones.size() : 0);
    summary.written += results[i].written;
    summary.skipped += results[i].skipped;
    if (results[i].error) summary.failures.push_back({e.utterance_id, *results[i].error});
  }
  write_text_atomically(out_dir / "plan.json", plan_to_json(plan).dump(2) + "\n");
  write_text_atomically(out_dir / "augment_summary.json", summary.to_json().dump(2) + "\n");
  return summary;
}

NormStats run_stats(const CorpusManifest& manifest, const fs::path& feature_dir,
                    const StatsOptions& opts) {
  std::vector<fs::path> files;
  std::vector<std::string> missing;
  std::size_t train = 0;
  for (const auto& e : manifest.entries) {
    if (e.split != Split::kTrain) continue;
    ++train;
    const fs::path original = feature_stem(feature_dir, e.utterance_id, 0);
    if (!complete(original)) {
      missing.push_back(original.string() + ".{f32,json}");
      continue;
    }
    files.push_back(original);
    if (!opts.include_augmented) continue;

    std::vector<fs::path> shifted;
    const std::string prefix = e.utterance_id + "_p";
    for (const auto& f : fs::directory_iterator(original.parent_path())) {
      const std::string name = f.path().filename().string();
      if (f.path().extension() != ".json" || !name.starts_with(prefix)) continue;
      fs::path stem = f.path();
      stem.replace_extension();
      if (stem == original) continue;
      if (!complete(stem)) {
        missing.push_back(stem.string() + ".f32");
        continue;
      }
      shifted.push_back(stem);
    }
    std::sort(shifted.begin(), shifted.end());
    files.insert(files.end(), shifted.begin(), shifted.end());
  }
  if (train == 0) throw InvalidInput("train split is empty");
  if (!missing.empty()) {
    std::string msg = "missing feature files:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw InvalidInput(msg);
  }

  NormAccumulator acc;
  for (const auto& stem : files) acc.add(read_feature_file(stem).values);
  return acc.finish();
}

}  // namespace psforge
