// psforge: pitch-shift feature augmentation and F0 regularization tooling.
//
// Exit codes: 0 success, 1 partial failure, 2 invalid input.

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "psforge/analysis.hpp"
#include "psforge/augment.hpp"
#include "psforge/feature_io.hpp"
#include "psforge/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitInvalid = 2;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw psforge::IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw psforge::InvalidInput(path.string() + ": malformed JSON: " + e.what());
  }
}

psforge::AugmentationPlan plan_or_default(const std::string& path) {
  return path.empty() ? psforge::parse_plan(json::object()) : psforge::load_plan(path);
}

int run_augment(const std::string& manifest_path, const std::string& plan_path,
                const std::string& out, std::size_t workers) {
  const auto manifest = psforge::validate_manifest(manifest_path);
  const auto plan = plan_or_default(plan_path);
  const auto summary = psforge::augment_corpus(manifest, plan, out, {workers});
  std::cout << summary.to_json().dump(2) << "\n";
  return summary.ok() ? kExitOk : kExitPartial;
}

int run_features(const std::string& wav, const std::string& out_stem,
                 const std::vector<int>& semitones, const std::string& plan_path,
                 std::string id, bool resample) {
  const auto plan = plan_or_default(plan_path);
  const auto wave = psforge::read_wav(wav, {psforge::kDefaultSampleRate, resample});
  if (id.empty()) id = fs::path(wav).stem().string();
  psforge::FeatureMetadata base;
  base.utterance_id = id;
  base.source_file = wav;
  const auto features = psforge::extract_utterance_features(wave, base, plan, semitones);
  const fs::path stem(out_stem);
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  for (const auto& fm : features) {
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "_p%+03d", static_cast<int>(fm.meta.semitone_p));
    fs::path target = stem;
    target += suffix;
    psforge::write_feature_file(target, fm);
    std::cout << target.string() << ".f32\n";
  }
  return kExitOk;
}

int run_stats(const std::string& manifest_path, const std::string& feature_dir,
              const std::string& out, bool originals_only) {
  const auto manifest = psforge::validate_manifest(manifest_path);
  const auto stats = psforge::run_stats(manifest, feature_dir, {!originals_only});
  const json provenance{{"manifest", manifest_path},
                        {"feature_dir", feature_dir},
                        {"split", "train"},
                        {"include_augmented", !originals_only}};
  psforge::write_norm_stats(out, stats, provenance);
  std::cout << "wrote " << out << " (" << stats.frames << " frames)\n";
  return kExitOk;
}

int run_analyze(const std::vector<std::string>& datasets, const std::string& out,
                bool augmented_only, bool originals_only) {
  std::vector<psforge::DatasetSource> sources;
  for (const auto& d : datasets) {
    const auto eq = d.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == d.size()) {
      throw psforge::InvalidInput("dataset must be given as label=DIR, got '" + d + "'");
    }
    sources.push_back({d.substr(0, eq), d.substr(eq + 1)});
  }
  if (augmented_only && originals_only) {
    throw psforge::InvalidInput("--augmented-only and --originals-only are exclusive");
  }
  psforge::AnalyzeOptions opts;
  if (augmented_only) opts.selection = psforge::CopySelection::kAugmentedOnly;
  if (originals_only) opts.selection = psforge::CopySelection::kOriginalsOnly;
  const auto report = psforge::analyze_f0_distribution(sources, opts);
  psforge::write_analysis_report(report, out);
  for (const auto& d : report.datasets) {
    std::cout << d.label << ": " << d.all.voiced_frames << " voiced frames, mean "
              << d.all.mean << " Hz, std " << d.all.std << " Hz\n";
  }
  return kExitOk;
}

bool is_binary_sequence(const std::string& path, const std::string& format) {
  if (format == "text") return false;
  if (format == "f32") return true;
  const auto ext = fs::path(path).extension();
  return ext == ".f32" || ext == ".bin";
}

int run_loss(const std::string& a, const std::string& b, const std::string& config,
             const std::string& format, bool breakdown) {
  const auto cfg = config.empty() ? psforge::LossConfig{}
                                  : psforge::parse_loss_config(read_json(config));
  const auto ref = psforge::read_sequence_file(a, is_binary_sequence(a, format));
  const auto pred = psforge::read_sequence_file(b, is_binary_sequence(b, format));
  const auto loss = psforge::multires_f0_loss_detailed(ref, pred, cfg);
  json out{{"loss", loss.value}};
  if (breakdown) {
    json per = json::array();
    for (std::size_t i = 0; i < cfg.resolutions.size(); ++i) {
      const auto& r = cfg.resolutions[i];
      per.push_back({{"fft_size", r.fft_size},
                     {"window_size", r.window_size},
                     {"hop_size", r.hop_size},
                     {"loss", loss.per_resolution[i]}});
    }
    out["resolutions"] = per;
    out["config"] = psforge::loss_config_to_json(cfg);
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"psforge: pitch-shift feature augmentation for speech corpora"};
  app.require_subcommand(1);
  // stdout carries JSON results; diagnostics go to stderr.
  spdlog::set_default_logger(spdlog::stderr_color_mt("psforge"));
  spdlog::set_pattern("[%l] %v");

  std::string manifest, plan, out;
  std::size_t workers = 0;
  auto* augment = app.add_subcommand("augment", "Run the semitone sweep over a manifest");
  augment->add_option("--manifest", manifest, "Corpus manifest (JSON)")->required();
  augment->add_option("--plan", plan, "Augmentation plan (JSON); defaults if omitted");
  augment->add_option("--out", out, "Output directory")->required();
  augment->add_option("--workers", workers, "Worker threads (default: PSFORGE_WORKERS or cores)");

  std::string wav, feat_out, id;
  std::vector<int> semitones;
  bool resample = false;
  auto* features = app.add_subcommand("features", "Extract 82-dim features from one WAV");
  features->add_option("--wav", wav, "Input 16-bit mono WAV")->required();
  features->add_option("--out", feat_out, "Output stem; _p+00 etc. is appended")->required();
  features->add_option("--semitones", semitones, "Shifts to emit besides the original");
  features->add_option("--plan", plan, "Plan providing analysis settings");
  features->add_option("--id", id, "Utterance id (default: file stem)");
  features->add_flag("--resample", resample, "Linearly resample other rates to 24 kHz");

  std::string feature_dir, stats_out;
  bool originals_only = false;
  auto* stats = app.add_subcommand("stats", "Normalization statistics over the train split");
  stats->add_option("--manifest", manifest, "Corpus manifest (JSON)")->required();
  stats->add_option("--features", feature_dir, "Feature directory written by augment")->required();
  stats->add_option("--out", stats_out, "Output stats JSON")->required();
  stats->add_flag("--originals-only", originals_only, "Exclude pitch-shifted copies");

  std::vector<std::string> datasets;
  std::string report_out;
  bool augmented_only = false, analyze_originals = false;
  auto* analyze = app.add_subcommand("analyze", "F0 distribution report");
  analyze->add_option("--dataset", datasets, "label=DIR, repeatable")->required();
  analyze->add_option("--out", report_out, "Report directory")->required();
  analyze->add_flag("--augmented-only", augmented_only, "Only pitch-shifted copies");
  analyze->add_flag("--originals-only", analyze_originals, "Only unshifted files");

  std::string seq_a, seq_b, loss_config, format = "auto";
  bool breakdown = false;
  auto* loss = app.add_subcommand("loss", "Multi-resolution STFT loss between two F0 sequences");
  loss->add_option("reference", seq_a, "Reference sequence file")->required();
  loss->add_option("predicted", seq_b, "Predicted sequence file")->required();
  loss->add_option("--config", loss_config, "Loss configuration (JSON)");
  loss->add_option("--format", format, "auto | text | f32")
      ->check(CLI::IsMember({"auto", "text", "f32"}));
  loss->add_flag("--breakdown", breakdown, "Include per-resolution values");

  auto* validate = app.add_subcommand("validate", "Check a manifest");
  validate->add_option("--manifest", manifest, "Corpus manifest (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*augment) return run_augment(manifest, plan, out, workers);
    if (*features) return run_features(wav, feat_out, semitones, plan, id, resample);
    if (*stats) return run_stats(manifest, feature_dir, stats_out, originals_only);
    if (*analyze) return run_analyze(datasets, report_out, augmented_only, analyze_originals);
    if (*loss) return run_loss(seq_a, seq_b, loss_config, format, breakdown);
    if (*validate) {
      const auto m = psforge::validate_manifest(manifest);
      std::cout << "ok: " << m.entries.size() << " entries\n";
      return kExitOk;
    }
  } catch (const psforge::InvalidInput& e) {
    spdlog::error("{}", e.what());
    return kExitInvalid;
  } catch (const psforge::IoError& e) {
    spdlog::error("{}", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitPartial;
  }
  return kExitInvalid;
}
