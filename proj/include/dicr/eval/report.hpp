#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dicr::eval {

inline constexpr int kReportSchemaVersion = 1;

struct MetricsReport {
  int schema_version = kReportSchemaVersion;
  double recall_1 = 0.0;
  double recall_10 = 0.0;
  double recall_25 = 0.0;
  double bleu1 = 0.0;
  double bleu2 = 0.0;
  double dist1 = 0.0;
  double dist2 = 0.0;
  double f1 = 0.0;
  // Empty when no record has gold items.
  std::optional<double> hit;
  double g_inter = 0.0;
  double g_inner = 0.0;
  double p_inter = 0.0;
  double p_inner = 0.0;
  std::size_t n_examples = 0;
  // Number of candidate paths used; 0 when not recorded.
  int n_paths = 0;

  bool operator==(const MetricsReport&) const = default;
};

// Names in file order, e.g. "recall@1".
const std::vector<std::string>& report_fields();

// "key: value" lines followed by a JSON block between "--- json" and
// "--- end" mirroring the same fields.
void write_report(std::ostream& os, const MetricsReport& report);
void save_report(const std::string& path, const MetricsReport& report);
// Reads the JSON block; VersionError on an unknown schema version.
MetricsReport read_report(std::istream& is);
MetricsReport load_report(const std::string& path);

struct SweepPlotFiles {
  std::vector<std::string> images;
  std::string csv;
};

// One PPM line chart per metric (hit, g_inter, g_inner, p_inter, p_inner)
// against n_paths, plus a CSV of the plotted values, written into `dir`.
// VersionError when the reports mix schema versions.
SweepPlotFiles emit_plots(std::span<const MetricsReport> reports, const std::string& dir);

}  // namespace dicr::eval
