#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "psforge/features.hpp"
#include "psforge/pitchshift.hpp"

namespace psforge {

inline constexpr int kSchemaVersion = 1;

enum class Split { kTrain, kDev, kEval };

Split parse_split(const std::string& name);
std::string to_string(Split split);

struct ManifestEntry {
  std::string utterance_id;
  std::filesystem::path wav_path;  // resolved against the manifest directory
  std::string speaker;
  std::string style;
  Split split = Split::kTrain;
};

struct AudioConfig {
  int sample_rate = kDefaultSampleRate;
  bool resample = false;
};

struct CorpusManifest {
  int schema_version = kSchemaVersion;
  AudioConfig audio;
  std::vector<std::string> styles;
  std::vector<ManifestEntry> entries;
};

inline const std::vector<std::string> kDefaultStyles = {"neutral", "happiness", "sadness"};

/// Parses and checks a manifest document. Relative wav paths are resolved
/// against `base_dir`. With `check_files` each wav must exist.
CorpusManifest parse_manifest(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                              bool check_files = true);

/// Reads, parses and checks a manifest file. Errors: malformed JSON, empty
/// corpus, duplicate or unsafe utterance ids, unknown styles or splits,
/// missing wav files.
CorpusManifest validate_manifest(const std::filesystem::path& path);

/// Semitone sweep -3..12 without 0: fifteen shifted copies per utterance.
std::vector<int> default_semitones();

struct AugmentationPlan {
  std::vector<int> semitones = default_semitones();
  PitchShiftOptions shift;
  StftConfig stft;
  MelConfig mel;
  AutocorrelationF0Options f0;
  std::vector<Split> augment_splits = {Split::kTrain};

  bool augments(Split split) const;
};

/// Missing keys keep their defaults. Rejects p = 0 (the original is always
/// written), duplicate shifts, and feature configs that do not give 82 dims.
AugmentationPlan parse_plan(const nlohmann::json& doc);
AugmentationPlan load_plan(const std::filesystem::path& path);
nlohmann::json plan_to_json(const AugmentationPlan& plan);

}  // namespace psforge
