#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "psforge/f0loss.hpp"
#include "psforge/features.hpp"

namespace psforge {

/// Paths of one stored feature matrix: `<stem>.f32` holds little-endian
/// float32 row-major N x 82 data, `<stem>.json` the sidecar metadata.
struct FeatureFilePaths {
  std::filesystem::path data;
  std::filesystem::path sidecar;

  static FeatureFilePaths from_stem(const std::filesystem::path& stem);
};

nlohmann::json sidecar_json(const FeatureMatrix& fm, const std::string& data_file_name);

/// Writes both files through `.partial` temporaries and renames them into
/// place, data first, sidecar last. A file set is complete once its sidecar
/// exists.
void write_feature_file(const std::filesystem::path& stem, const FeatureMatrix& fm);

/// Reads `<stem>.f32` and `<stem>.json`; accepts either file path or the stem.
FeatureMatrix read_feature_file(const std::filesystem::path& path);

/// Rounds every entry to float32, exactly as storing and reloading would.
void quantize_to_float32(Matrix& m);

/// Reads a whitespace/newline separated list of numbers, or raw little-endian
/// float32 when `binary` is set.
std::vector<double> read_sequence_file(const std::filesystem::path& path, bool binary);

void write_norm_stats(const std::filesystem::path& path, const NormStats& stats,
                      const nlohmann::json& provenance = nlohmann::json::object());
NormStats read_norm_stats(const std::filesystem::path& path);

/// Loss configuration document: {"beta", "weight", "floor", "resolutions":
/// [{"fft_size", "window_size", "hop_size"}, ...]}. Missing keys keep defaults.
LossConfig parse_loss_config(const nlohmann::json& doc);
nlohmann::json loss_config_to_json(const LossConfig& cfg);

/// Writes `text` via a temporary sibling and rename.
void write_text_atomically(const std::filesystem::path& path, const std::string& text);

}  // namespace psforge
