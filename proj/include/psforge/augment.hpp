#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "psforge/manifest.hpp"

namespace psforge {

/// Features of one utterance: the original (p = 0) followed by one matrix per
/// requested shift, in the given order.
///
/// The original continuous log F0 is rounded to float32 before shifting so
/// that the stored relation aug = float32(orig + (p/12) ln 2) holds bit-for-bit
/// between the written files. V/UV is always the original's.
std::vector<FeatureMatrix> extract_utterance_features(const Waveform& wave,
                                                      const FeatureMetadata& base,
                                                      const AugmentationPlan& plan,
                                                      std::span<const int> semitones);

/// `<out>/<id>/<id>_p+03` style stem (no extension).
std::filesystem::path feature_stem(const std::filesystem::path& out_dir,
                                   const std::string& utterance_id, int semitones);

struct UtteranceFailure {
  std::string utterance_id;
  std::string message;
};

struct AugmentSummary {
  std::size_t entries = 0;
  std::size_t expected_files = 0;
  std::size_t written = 0;
  std::size_t skipped = 0;  // already complete from an earlier run
  std::vector<UtteranceFailure> failures;

  bool ok() const { return failures.empty(); }
  nlohmann::json to_json() const;
};

struct AugmentOptions {
  std::size_t workers = 0;  // 0: PSFORGE_WORKERS or hardware concurrency
};

/// Resolves the worker count: explicit value, else PSFORGE_WORKERS, else the
/// number of hardware threads.
std::size_t resolve_workers(std::size_t requested);

/// Writes originals for every entry and one shifted copy per plan semitone for
/// entries in the plan's augment splits. Utterances are processed in parallel;
/// output paths depend only on (utterance_id, p), so results do not depend on
/// scheduling. Complete outputs from an earlier run are kept and not
/// recomputed. A failing utterance is reported in the summary and its
/// directory is marked with a `.partial` file. `plan.json` and
/// `augment_summary.json` are written to `out_dir`.
AugmentSummary augment_corpus(const CorpusManifest& manifest, const AugmentationPlan& plan,
                              const std::filesystem::path& out_dir,
                              const AugmentOptions& opts = {});

struct StatsOptions {
  bool include_augmented = true;
};

/// Normalization statistics over the train split only. Throws InvalidInput
/// when the train split is empty or listing every missing original.
NormStats run_stats(const CorpusManifest& manifest, const std::filesystem::path& feature_dir,
                    const StatsOptions& opts = {});

/// Name of the per-utterance failure marker.
inline constexpr const char* kPartialMarker = ".partial";

}  // namespace psforge
