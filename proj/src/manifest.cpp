#include "psforge/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

namespace psforge {
namespace fs = std::filesystem;
using nlohmann::json;

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "eval") return Split::kEval;
  throw InvalidInput("unknown split '" + name + "'");
}

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kEval: return "eval";
  }
  return "train";
}

namespace {

json parse_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path.string() + ": malformed JSON: " + e.what());
  }
}

void check_schema(const json& doc, const char* what) {
  if (!doc.is_object()) throw InvalidInput(std::string(what) + " must be a JSON object");
  if (doc.contains("schema_version") && doc.at("schema_version").get<int>() != kSchemaVersion) {
    throw InvalidInput(std::string("unsupported ") + what + " schema_version " +
                       doc.at("schema_version").dump());
  }
}

bool safe_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

CorpusManifest parse_manifest(const json& doc, const fs::path& base_dir, bool check_files) {
  check_schema(doc, "manifest");
  CorpusManifest m;
  try {
    if (doc.contains("audio")) {
      const auto& a = doc.at("audio");
      m.audio.sample_rate = a.value("sample_rate", kDefaultSampleRate);
      m.audio.resample = a.value("resample", false);
    }
    m.styles = doc.value("styles", kDefaultStyles);
    if (!doc.contains("entries") || !doc.at("entries").is_array()) {
      throw InvalidInput("manifest has no 'entries' array");
    }
    for (const auto& e : doc.at("entries")) {
      ManifestEntry entry;
      entry.utterance_id = e.at("utterance_id").get<std::string>();
      entry.wav_path = e.at("wav_path").get<std::string>();
      if (entry.wav_path.is_relative()) entry.wav_path = base_dir / entry.wav_path;
      entry.speaker = e.value("speaker", "");
      entry.style = e.value("style", m.styles.empty() ? "" : m.styles.front());
      entry.split = parse_split(e.value("split", "train"));
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed manifest: ") + e.what());
  }
  if (m.audio.sample_rate <= 0) throw InvalidInput("audio.sample_rate must be positive");
  if (m.entries.empty()) throw InvalidInput("empty corpus");

  std::set<std::string> seen;
  const std::set<std::string> styles(m.styles.begin(), m.styles.end());
  for (const auto& e : m.entries) {
    if (!safe_id(e.utterance_id)) {
      throw InvalidInput("utterance_id '" + e.utterance_id +
                         "' must be non-empty and use only [A-Za-z0-9._-]");
    }
    if (!seen.insert(e.utterance_id).second) {
      throw InvalidInput("duplicate utterance_id '" + e.utterance_id + "'");
    }
    if (!styles.contains(e.style)) {
      throw InvalidInput("utterance '" + e.utterance_id + "' has unknown style '" + e.style + "'");
    }
    if (check_files && !fs::is_regular_file(e.wav_path)) {
      throw InvalidInput("utterance '" + e.utterance_id + "': missing file " + e.wav_path.string());
    }
  }
  return m;
}

CorpusManifest validate_manifest(const fs::path& path) {
  return parse_manifest(parse_json_file(path), path.parent_path());
}

std::vector<int> default_semitones() {
  std::vector<int> s;
  for (int p = -3; p <= 12; ++p) {
    if (p != 0) s.push_back(p);
  }
  return s;
}

bool AugmentationPlan::augments(Split split) const {
  return std::find(augment_splits.begin(), augment_splits.end(), split) != augment_splits.end();
}

namespace {

LifterShape parse_lifter_shape(const std::string& s) {
  if (s == "rectangular") return LifterShape::kRectangular;
  if (s == "hann") return LifterShape::kHann;
  throw InvalidInput("unknown lifter_shape '" + s + "'");
}

std::string lifter_shape_name(LifterShape s) {
  return s == LifterShape::kHann ? "hann" : "rectangular";
}

OutOfRange parse_out_of_range(const std::string& s) {
  if (s == "clamp") return OutOfRange::kClamp;
  if (s == "mirror") return OutOfRange::kMirror;
  if (s == "unity") return OutOfRange::kUnity;
  throw InvalidInput("unknown out_of_range policy '" + s + "'");
}

std::string out_of_range_name(OutOfRange p) {
  switch (p) {
    case OutOfRange::kClamp: return "clamp";
    case OutOfRange::kMirror: return "mirror";
    case OutOfRange::kUnity: return "unity";
  }
  return "clamp";
}

}  // namespace

AugmentationPlan parse_plan(const json& doc) {
  check_schema(doc, "plan");
  AugmentationPlan plan;
  try {
    if (doc.contains("semitones")) plan.semitones = doc.at("semitones").get<std::vector<int>>();
    plan.shift.separation.lifter_cutoff_ms =
        doc.value("lifter_cutoff_ms", plan.shift.separation.lifter_cutoff_ms);
    if (doc.contains("lifter_shape")) {
      plan.shift.separation.shape = parse_lifter_shape(doc.at("lifter_shape").get<std::string>());
    }
    if (doc.contains("out_of_range")) {
      plan.shift.out_of_range = parse_out_of_range(doc.at("out_of_range").get<std::string>());
    }
    if (doc.contains("stft")) {
      const auto& s = doc.at("stft");
      plan.stft.window_length = s.value("window_length", plan.stft.window_length);
      plan.stft.hop_length = s.value("hop_length", plan.stft.hop_length);
      plan.stft.fft_size = s.value("fft_size", plan.stft.fft_size);
    }
    if (doc.contains("mel")) {
      const auto& s = doc.at("mel");
      plan.mel.n_mels = s.value("n_mels", plan.mel.n_mels);
      plan.mel.fmin = s.value("fmin", plan.mel.fmin);
      plan.mel.fmax = s.value("fmax", plan.mel.fmax);
      const std::string norm = s.value("normalization", std::string("area"));
      if (norm == "area") {
        plan.mel.normalization = MelNormalization::kArea;
      } else if (norm == "peak") {
        plan.mel.normalization = MelNormalization::kPeak;
      } else {
        throw InvalidInput("unknown Mel normalization '" + norm + "'");
      }
    }
    if (doc.contains("f0")) {
      const auto& s = doc.at("f0");
      plan.f0.fmin = s.value("fmin", plan.f0.fmin);
      plan.f0.fmax = s.value("fmax", plan.f0.fmax);
      plan.f0.voicing_threshold = s.value("voicing_threshold", plan.f0.voicing_threshold);
    }
    if (doc.contains("augment_splits")) {
      plan.augment_splits.clear();
      for (const auto& s : doc.at("augment_splits")) {
        plan.augment_splits.push_back(parse_split(s.get<std::string>()));
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed plan: ") + e.what());
  }

  std::set<int> seen;
  for (int p : plan.semitones) {
    if (p == 0) throw InvalidInput("semitone set must not contain 0; originals are always written");
    if (!seen.insert(p).second) throw InvalidInput("duplicate semitone " + std::to_string(p));
  }
  if (plan.mel.n_mels != kMelBands) {
    throw InvalidInput("n_mels must be " + std::to_string(kMelBands) + " for 82-dim features");
  }
  validate(plan.stft);
  plan.f0.framing = plan.stft;
  return plan;
}

AugmentationPlan load_plan(const fs::path& path) { return parse_plan(parse_json_file(path)); }

json plan_to_json(const AugmentationPlan& plan) {
  json splits = json::array();
  for (Split s : plan.augment_splits) splits.push_back(to_string(s));
  return json{
      {"schema_version", kSchemaVersion},
      {"semitones", plan.semitones},
      {"lifter_cutoff_ms", plan.shift.separation.lifter_cutoff_ms},
      {"lifter_shape", lifter_shape_name(plan.shift.separation.shape)},
      {"out_of_range", out_of_range_name(plan.shift.out_of_range)},
      {"stft",
       {{"window_length", plan.stft.window_length},
        {"hop_length", plan.stft.hop_length},
        {"fft_size", plan.stft.fft_size}}},
      {"mel",
       {{"n_mels", plan.mel.n_mels},
        {"fmin", plan.mel.fmin},
        {"fmax", plan.mel.fmax},
        {"normalization",
         plan.mel.normalization == MelNormalization::kArea ? "area" : "peak"}}},
      {"f0",
       {{"fmin", plan.f0.fmin},
        {"fmax", plan.f0.fmax},
        {"voicing_threshold", plan.f0.voicing_threshold}}},
      {"augment_splits", splits},
  };
}

}  // namespace psforge
