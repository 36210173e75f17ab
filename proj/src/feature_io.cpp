#include "psforge/feature_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>

namespace psforge {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("write failed: " + path.string());
}

fs::path partial_path(const fs::path& path) {
  fs::path p = path;
  p += ".partial";
  return p;
}

std::string encode_f32(std::span<const double> values) {
  std::string bytes(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  return bytes;
}

float decode_f32(const std::string& bytes, std::size_t i) {
  std::uint32_t bits = 0;
  for (int b = 0; b < 4; ++b) {
    bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
  }
  return std::bit_cast<float>(bits);
}

}  // namespace

FeatureFilePaths FeatureFilePaths::from_stem(const fs::path& stem) {
  fs::path data = stem, sidecar = stem;
  data += ".f32";
  sidecar += ".json";
  return {data, sidecar};
}

json sidecar_json(const FeatureMatrix& fm, const std::string& data_file_name) {
  return json{
      {"utterance_id", fm.meta.utterance_id},
      {"n_frames", fm.frames()},
      {"dims", kFeatureDims},
      {"sample_rate", fm.meta.sample_rate},
      {"hop_ms", fm.meta.hop_ms},
      {"semitone_p", fm.meta.semitone_p},
      {"log_f0_offset", log_f0_offset(fm.meta.semitone_p)},
      {"source_file", fm.meta.source_file},
      {"speaker", fm.meta.speaker},
      {"style", fm.meta.style},
      {"data_file", data_file_name},
      {"dtype", "float32-le"},
      {"column_layout",
       {{"log_mel", {0, kMelBands}},
        {"continuous_log_f0", kLogF0Column},
        {"vuv", kVuvColumn}}},
  };
}

void write_text_atomically(const fs::path& path, const std::string& text) {
  const auto tmp = partial_path(path);
  write_all(tmp, text);
  fs::rename(tmp, path);
}

void write_feature_file(const fs::path& stem, const FeatureMatrix& fm) {
  validate(fm);
  const auto paths = FeatureFilePaths::from_stem(stem);
  const auto data_tmp = partial_path(paths.data);
  const auto side_tmp = partial_path(paths.sidecar);
  write_all(data_tmp, encode_f32(fm.values.data()));
  write_all(side_tmp, sidecar_json(fm, paths.data.filename().string()).dump(2) + "\n");
  fs::rename(data_tmp, paths.data);
  fs::rename(side_tmp, paths.sidecar);
}

FeatureMatrix read_feature_file(const fs::path& path) {
  fs::path stem = path;
  if (stem.extension() == ".f32" || stem.extension() == ".json") stem.replace_extension();
  const auto paths = FeatureFilePaths::from_stem(stem);

  json side;
  try {
    side = json::parse(read_all(paths.sidecar));
  } catch (const json::parse_error& e) {
    throw IoError(paths.sidecar.string() + ": " + e.what());
  }
  const auto n_frames = side.at("n_frames").get<std::size_t>();
  const auto dims = side.at("dims").get<std::size_t>();
  if (dims != kFeatureDims) throw InvalidInput(paths.sidecar.string() + ": dims must be 82");

  const std::string bytes = read_all(paths.data);
  if (bytes.size() != n_frames * dims * 4) {
    throw IoError(paths.data.string() + ": size does not match sidecar frame count");
  }
  FeatureMatrix fm{Matrix(n_frames, dims), {}};
  auto out = fm.values.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = decode_f32(bytes, i);

  fm.meta.utterance_id = side.value("utterance_id", "");
  fm.meta.sample_rate = side.value("sample_rate", kDefaultSampleRate);
  fm.meta.hop_ms = side.value("hop_ms", 5.0);
  fm.meta.semitone_p = side.value("semitone_p", 0.0);
  fm.meta.source_file = side.value("source_file", "");
  fm.meta.speaker = side.value("speaker", "");
  fm.meta.style = side.value("style", "");
  return fm;
}

void quantize_to_float32(Matrix& m) {
  for (double& v : m.data()) v = static_cast<double>(static_cast<float>(v));
}

std::vector<double> read_sequence_file(const fs::path& path, bool binary) {
  const std::string bytes = read_all(path);
  std::vector<double> seq;
  if (binary) {
    if (bytes.size() % 4 != 0) throw InvalidInput(path.string() + ": not a float32 file");
    seq.resize(bytes.size() / 4);
    for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = decode_f32(bytes, i);
  } else {
    std::istringstream in(bytes);
    std::string token;
    while (in >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) throw InvalidInput(path.string() + ": bad number '" + token + "'");
      seq.push_back(v);
    }
  }
  for (double v : seq) {
    if (!std::isfinite(v)) throw InvalidInput(path.string() + ": non-finite value");
  }
  return seq;
}

void write_norm_stats(const fs::path& path, const NormStats& stats, const json& provenance) {
  const json j{{"dims", stats.mean.size()},
               {"n_frames", stats.frames},
               {"mean", stats.mean},
               {"std", stats.std},
               {"normalized_exempt", {kVuvColumn}},
               {"provenance", provenance}};
  write_text_atomically(path, j.dump(2) + "\n");
}

NormStats read_norm_stats(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_all(path));
  } catch (const json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  NormStats stats;
  stats.mean = j.at("mean").get<std::vector<double>>();
  stats.std = j.at("std").get<std::vector<double>>();
  stats.frames = j.value("n_frames", std::size_t{0});
  if (stats.mean.size() != stats.std.size()) {
    throw InvalidInput(path.string() + ": mean and std lengths differ");
  }
  return stats;
}

LossConfig parse_loss_config(const json& doc) {
  LossConfig cfg;
  try {
    cfg.beta = doc.value("beta", cfg.beta);
    cfg.weight = doc.value("weight", cfg.weight);
    cfg.floor = doc.value("floor", cfg.floor);
    if (doc.contains("resolutions")) {
      cfg.resolutions.clear();
      for (const auto& r : doc.at("resolutions")) {
        cfg.resolutions.push_back({r.at("fft_size").get<std::size_t>(),
                                   r.at("window_size").get<std::size_t>(),
                                   r.at("hop_size").get<std::size_t>()});
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed loss config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

json loss_config_to_json(const LossConfig& cfg) {
  json res = json::array();
  for (const auto& r : cfg.resolutions) {
    res.push_back({{"fft_size", r.fft_size}, {"window_size", r.window_size}, {"hop_size", r.hop_size}});
  }
  return {{"beta", cfg.beta}, {"weight", cfg.weight}, {"floor", cfg.floor}, {"resolutions", res}};
}

}  // namespace psforge
