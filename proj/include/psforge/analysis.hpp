#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace psforge {

/// Fixed-width F0 histogram over [lo, hi]. Values outside the range are
/// counted in the edge bins and tallied in `clamped`.
struct HistogramSpec {
  double lo_hz = 50.0;
  double hi_hz = 1000.0;
  double width_hz = 5.0;

  std::size_t bins() const;
  std::size_t bin_of(double hz) const;
  double bin_center(std::size_t i) const { return lo_hz + (static_cast<double>(i) + 0.5) * width_hz; }
};

struct F0Summary {
  std::size_t voiced_frames = 0;
  std::size_t clamped = 0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::size_t> counts;

  nlohmann::json to_json() const;
};

/// Histogram and moments of voiced F0 values in Hz.
F0Summary summarize_f0(std::span<const double> hz, const HistogramSpec& spec = {});

struct DatasetReport {
  std::string label;
  std::size_t files = 0;
  F0Summary all;
  std::map<std::string, F0Summary> by_style;
};

struct AnalysisReport {
  HistogramSpec histogram;
  std::vector<DatasetReport> datasets;

  nlohmann::json to_json() const;
};

struct DatasetSource {
  std::string label;
  std::filesystem::path dir;  // searched recursively for feature files
};

enum class CopySelection { kAll, kOriginalsOnly, kAugmentedOnly };

struct AnalyzeOptions {
  HistogramSpec histogram;
  CopySelection selection = CopySelection::kAll;
};

/// F0 distributions per dataset and style from stored feature matrices:
/// exp(continuous log F0) over frames with V/UV = 1. Any directory of
/// feature files works, including externally converted data. Throws
/// InvalidInput when a dataset has no voiced frames.
AnalysisReport analyze_f0_distribution(std::span<const DatasetSource> datasets,
                                       const AnalyzeOptions& opts = {});

/// Writes `f0_report.json` and one `<label>.svg` histogram per dataset.
void write_analysis_report(const AnalysisReport& report, const std::filesystem::path& out_dir);

/// Stand-alone SVG bar plot of one dataset's per-style histograms.
std::string render_histogram_svg(const DatasetReport& dataset, const HistogramSpec& spec);

}  // namespace psforge
