#include "psforge/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "psforge/feature_io.hpp"

namespace psforge {
namespace fs = std::filesystem;
using nlohmann::json;

std::size_t HistogramSpec::bins() const {
  return static_cast<std::size_t>(std::llround((hi_hz - lo_hz) / width_hz));
}

std::size_t HistogramSpec::bin_of(double hz) const {
  const double pos = std::floor((hz - lo_hz) / width_hz);
  if (pos < 0.0) return 0;
  return std::min(static_cast<std::size_t>(pos), bins() - 1);
}

F0Summary summarize_f0(std::span<const double> hz, const HistogramSpec& spec) {
  F0Summary s;
  s.counts.assign(spec.bins(), 0);
  if (hz.empty()) return s;
  double sum = 0.0;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  for (double f : hz) {
    sum += f;
    s.min = std::min(s.min, f);
    s.max = std::max(s.max, f);
    ++s.counts[spec.bin_of(f)];
    if (f < spec.lo_hz || f > spec.hi_hz) ++s.clamped;
  }
  s.voiced_frames = hz.size();
  s.mean = sum / static_cast<double>(hz.size());
  double ss = 0.0;
  for (double f : hz) ss += (f - s.mean) * (f - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(hz.size()));
  return s;
}

json F0Summary::to_json() const {
  return {{"voiced_frames", voiced_frames}, {"clamped", clamped}, {"mean_hz", mean},
          {"std_hz", std},                  {"min_hz", min},       {"max_hz", max},
          {"counts", counts}};
}

json AnalysisReport::to_json() const {
  json ds = json::array();
  for (const auto& d : datasets) {
    json styles = json::object();
    for (const auto& [style, s] : d.by_style) styles[style] = s.to_json();
    ds.push_back({{"label", d.label}, {"files", d.files}, {"all", d.all.to_json()},
                  {"styles", styles}});
  }
  return {{"histogram",
           {{"lo_hz", histogram.lo_hz},
            {"hi_hz", histogram.hi_hz},
            {"width_hz", histogram.width_hz},
            {"bins", histogram.bins()}}},
          {"datasets", ds}};
}

namespace {

std::vector<fs::path> feature_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidInput("not a directory: " + dir.string());
  std::vector<fs::path> stems;
  for (const auto& f : fs::recursive_directory_iterator(dir)) {
    if (!f.is_regular_file() || f.path().extension() != ".json") continue;
    fs::path stem = f.path();
    stem.replace_extension();
    if (fs::is_regular_file(FeatureFilePaths::from_stem(stem).data)) stems.push_back(stem);
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

bool selected(double p, CopySelection sel) {
  switch (sel) {
    case CopySelection::kAll: return true;
    case CopySelection::kOriginalsOnly: return p == 0.0;
    case CopySelection::kAugmentedOnly: return p != 0.0;
  }
  return true;
}

}  // namespace

AnalysisReport analyze_f0_distribution(std::span<const DatasetSource> datasets,
                                       const AnalyzeOptions& opts) {
  if (datasets.empty()) throw InvalidInput("at least one dataset is required");
  if (!(opts.histogram.width_hz > 0.0) || !(opts.histogram.lo_hz < opts.histogram.hi_hz)) {
    throw InvalidInput("invalid histogram range");
  }
  AnalysisReport report{opts.histogram, {}};
  for (const auto& src : datasets) {
    std::vector<double> all;
    std::map<std::string, std::vector<double>> by_style;
    DatasetReport d;
    d.label = src.label;
    for (const auto& stem : feature_files(src.dir)) {
      const FeatureMatrix fm = read_feature_file(stem);
      if (!selected(fm.meta.semitone_p, opts.selection)) continue;
      ++d.files;
      auto& style = by_style[fm.meta.style.empty() ? "unknown" : fm.meta.style];
      for (std::size_t t = 0; t < fm.frames(); ++t) {
        if (fm.values(t, kVuvColumn) != 1.0) continue;
        const double hz = std::exp(fm.values(t, kLogF0Column));
        all.push_back(hz);
        style.push_back(hz);
      }
    }
    if (all.empty()) throw InvalidInput("dataset '" + src.label + "' has no voiced frames");
    d.all = summarize_f0(all, opts.histogram);
    for (const auto& [style, values] : by_style) {
      d.by_style[style] = summarize_f0(values, opts.histogram);
    }
    report.datasets.push_back(std::move(d));
  }
  return report;
}

std::string render_histogram_svg(const DatasetReport& dataset, const HistogramSpec& spec) {
  constexpr double kWidth = 760, kHeight = 360, kLeft = 60, kRight = 20, kTop = 30, kBottom = 50;
  constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c",
                                                  "#9467bd", "#ff7f0e", "#8c564b"};
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const std::size_t n_bins = spec.bins();

  double peak = 0.0;
  for (const auto& [style, s] : dataset.by_style) {
    const double total = static_cast<double>(std::max<std::size_t>(s.voiced_frames, 1));
    for (std::size_t c : s.counts) peak = std::max(peak, static_cast<double>(c) / total);
  }
  if (peak <= 0.0) peak = 1.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << dataset.label << "</text>\n";

  std::size_t color = 0;
  for (const auto& [style, s] : dataset.by_style) {
    const double total = static_cast<double>(std::max<std::size_t>(s.voiced_frames, 1));
    const char* fill = kColors[color % kColors.size()];
    for (std::size_t i = 0; i < n_bins; ++i) {
      if (s.counts[i] == 0) continue;
      const double h = plot_h * (static_cast<double>(s.counts[i]) / total) / peak;
      svg << "<rect x=\"" << kLeft + plot_w * static_cast<double>(i) / static_cast<double>(n_bins)
          << "\" y=\"" << kTop + plot_h - h << "\" width=\"" << plot_w / static_cast<double>(n_bins)
          << "\" height=\"" << h << "\" fill=\"" << fill << "\" fill-opacity=\"0.5\"/>\n";
    }
    svg << "<text x=\"" << kWidth - kRight - 150 << "\" y=\"" << kTop + 16 * (color + 1)
        << "\" font-size=\"12\" fill=\"" << fill << "\">" << style << " (n=" << s.voiced_frames
        << ")</text>\n";
    ++color;
  }

  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  for (double hz = spec.lo_hz; hz <= spec.hi_hz + 1e-9; hz += 100.0) {
    const double x = kLeft + plot_w * (hz - spec.lo_hz) / (spec.hi_hz - spec.lo_hz);
    svg << "<text x=\"" << x << "\" y=\"" << kTop + plot_h + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << hz << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\" font-size=\"12\">F0 [Hz]</text>\n";
  svg << "<text x=\"15\" y=\"" << kTop + plot_h / 2
      << "\" font-size=\"12\" transform=\"rotate(-90 15 " << kTop + plot_h / 2
      << ")\" text-anchor=\"middle\">relative frequency</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_analysis_report(const AnalysisReport& report, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_text_atomically(out_dir / "f0_report.json", report.to_json().dump(2) + "\n");
  for (const auto& d : report.datasets) {
    write_text_atomically(out_dir / (d.label + ".svg"), render_histogram_svg(d, report.histogram));
  }
}

}  // namespace psforge
