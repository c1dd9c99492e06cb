#include "dicr/eval/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "dicr/error.hpp"

namespace dicr::eval {

namespace {

using nlohmann::json;

struct NamedValue {
  std::string name;
  std::optional<double> value;
};

std::vector<NamedValue> values_of(const MetricsReport& r) {
  return {{"recall@1", r.recall_1}, {"recall@10", r.recall_10}, {"recall@25", r.recall_25},
          {"bleu1", r.bleu1},       {"bleu2", r.bleu2},         {"dist1", r.dist1},
          {"dist2", r.dist2},       {"f1", r.f1},               {"hit", r.hit},
          {"g_inter", r.g_inter},   {"g_inner", r.g_inner},     {"p_inter", r.p_inter},
          {"p_inner", r.p_inner}};
}

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ParseError(std::string("report is missing '") + key + "'");
  return j.at(key).get<double>();
}

}  // namespace

const std::vector<std::string>& report_fields() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out{"schema_version"};
    for (const auto& v : values_of(MetricsReport{})) out.push_back(v.name);
    out.push_back("n_examples");
    out.push_back("n_paths");
    return out;
  }();
  return names;
}

void write_report(std::ostream& os, const MetricsReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  os << "schema_version: " << r.schema_version << '\n';
  os << std::fixed << std::setprecision(6);
  for (const auto& v : values_of(r)) {
    if (v.value) {
      os << v.name << ": " << *v.value << '\n';
      j[v.name] = *v.value;
    } else {
      os << v.name << ": null\n";
      j[v.name] = nullptr;
    }
  }
  os << "n_examples: " << r.n_examples << '\n';
  os << "n_paths: " << r.n_paths << '\n';
  j["n_examples"] = r.n_examples;
  j["n_paths"] = r.n_paths;
  os << "--- json\n" << j.dump() << "\n--- end\n";
}

void save_report(const std::string& path, const MetricsReport& report) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write report " + path);
  write_report(os, report);
}

MetricsReport read_report(std::istream& is) {
  std::string line, block;
  bool inside = false;
  while (std::getline(is, line)) {
    if (line == "--- json") {
      inside = true;
    } else if (line == "--- end") {
      break;
    } else if (inside) {
      block += line;
    }
  }
  if (block.empty()) throw ParseError("report has no json block");
  json j;
  try {
    j = json::parse(block);
  } catch (const json::exception& e) {
    throw ParseError(std::string("report json: ") + e.what());
  }
  MetricsReport r;
  r.schema_version = static_cast<int>(number(j, "schema_version"));
  if (r.schema_version != kReportSchemaVersion) {
    throw VersionError("unsupported report schema_version " + std::to_string(r.schema_version));
  }
  r.recall_1 = number(j, "recall@1");
  r.recall_10 = number(j, "recall@10");
  r.recall_25 = number(j, "recall@25");
  r.bleu1 = number(j, "bleu1");
  r.bleu2 = number(j, "bleu2");
  r.dist1 = number(j, "dist1");
  r.dist2 = number(j, "dist2");
  r.f1 = number(j, "f1");
  if (!j.contains("hit")) throw ParseError("report is missing 'hit'");
  if (!j.at("hit").is_null()) r.hit = number(j, "hit");
  r.g_inter = number(j, "g_inter");
  r.g_inner = number(j, "g_inner");
  r.p_inter = number(j, "p_inter");
  r.p_inner = number(j, "p_inner");
  r.n_examples = static_cast<std::size_t>(number(j, "n_examples"));
  r.n_paths = static_cast<int>(number(j, "n_paths"));
  return r;
}

MetricsReport load_report(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read report " + path);
  return read_report(is);
}

namespace {

struct Rgb {
  std::uint8_t r, g, b;
};

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h, Rgb{255, 255, 255}) {}

  void set(int x, int y, Rgb c) {
    if (x >= 0 && y >= 0 && x < w_ && y < h_) px_[static_cast<std::size_t>(y) * w_ + x] = c;
  }

  void line(int x0, int y0, int x1, int y1, Rgb c) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      set(x0, y0, c);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  void box(int cx, int cy, int radius, Rgb c) {
    for (int y = cy - radius; y <= cy + radius; ++y) {
      for (int x = cx - radius; x <= cx + radius; ++x) set(x, y, c);
    }
  }

  // 3x5 digits and '.', scaled by 2.
  void text(int x, int y, const std::string& s, Rgb c) {
    static const std::array<std::array<std::uint8_t, 5>, 11> glyphs = {{
        {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1}, {7, 4, 7, 1, 7},
        {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7}, {0, 0, 0, 0, 2},
    }};
    for (char ch : s) {
      int g = ch == '.' ? 10 : ch - '0';
      if (g < 0 || g > 10) {
        x += 8;
        continue;
      }
      for (int row = 0; row < 5; ++row) {
        for (int col = 0; col < 3; ++col) {
          if (glyphs[static_cast<std::size_t>(g)][static_cast<std::size_t>(row)] & (4 >> col)) {
            box(x + col * 2, y + row * 2, 0, c);
            box(x + col * 2 + 1, y + row * 2, 0, c);
            box(x + col * 2, y + row * 2 + 1, 0, c);
            box(x + col * 2 + 1, y + row * 2 + 1, 0, c);
          }
        }
      }
      x += 8;
    }
  }

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write plot " + path);
    os << "P6\n" << w_ << ' ' << h_ << "\n255\n";
    for (const auto& p : px_) os.put(static_cast<char>(p.r)).put(static_cast<char>(p.g)).put(static_cast<char>(p.b));
  }

 private:
  int w_, h_;
  std::vector<Rgb> px_;
};

void plot_series(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& path) {
  constexpr int kW = 480, kH = 320, kLeft = 56, kRight = 24, kTop = 20, kBottom = 40;
  Canvas c(kW, kH);
  const Rgb black{0, 0, 0}, grid{220, 220, 220}, blue{31, 90, 180};
  const double x_lo = *std::min_element(xs.begin(), xs.end());
  const double x_hi = *std::max_element(xs.begin(), xs.end());
  auto px = [&](double x) {
    if (x_hi == x_lo) return (kLeft + kW - kRight) / 2;
    return kLeft + static_cast<int>(std::lround((x - x_lo) / (x_hi - x_lo) * (kW - kLeft - kRight)));
  };
  auto py = [&](double y) {
    return kH - kBottom - static_cast<int>(std::lround(std::clamp(y, 0.0, 1.0) * (kH - kTop - kBottom)));
  };
  for (int i = 0; i <= 4; ++i) {
    const double y = i / 4.0;
    c.line(kLeft, py(y), kW - kRight, py(y), grid);
    std::ostringstream label;
    label << std::fixed << std::setprecision(2) << y;
    c.text(8, py(y) - 5, label.str(), black);
  }
  c.line(kLeft, kTop, kLeft, kH - kBottom, black);
  c.line(kLeft, kH - kBottom, kW - kRight, kH - kBottom, black);
  for (double x : xs) {
    c.line(px(x), kH - kBottom, px(x), kH - kBottom + 5, black);
    const auto label = std::to_string(static_cast<long long>(std::llround(x)));
    c.text(px(x) - 4 * static_cast<int>(label.size()), kH - kBottom + 10, label, black);
  }
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) c.line(px(xs[i]), py(ys[i]), px(xs[i + 1]), py(ys[i + 1]), blue);
  for (std::size_t i = 0; i < xs.size(); ++i) c.box(px(xs[i]), py(ys[i]), 2, blue);
  c.save(path);
}

}  // namespace

SweepPlotFiles emit_plots(std::span<const MetricsReport> reports, const std::string& dir) {
  if (reports.empty()) throw PreconditionError("no reports to plot");
  for (const auto& r : reports) {
    if (r.schema_version != reports.front().schema_version) throw VersionError("reports mix schema versions");
  }
  std::vector<const MetricsReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const MetricsReport* a, const MetricsReport* b) { return a->n_paths < b->n_paths; });

  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, double MetricsReport::*>> series = {
      {"g_inter", &MetricsReport::g_inter},
      {"g_inner", &MetricsReport::g_inner},
      {"p_inter", &MetricsReport::p_inter},
      {"p_inner", &MetricsReport::p_inner},
  };
  std::vector<double> xs, hits;
  for (const auto* r : sorted) {
    xs.push_back(r->n_paths);
    hits.push_back(r->hit.value_or(0.0));
  }

  SweepPlotFiles out;
  const auto base = std::filesystem::path(dir);
  out.images.push_back((base / "hit_vs_np.ppm").string());
  plot_series(xs, hits, out.images.back());
  for (const auto& [name, member] : series) {
    std::vector<double> ys;
    for (const auto* r : sorted) ys.push_back(r->*member);
    out.images.push_back((base / (name + "_vs_np.ppm")).string());
    plot_series(xs, ys, out.images.back());
  }

  out.csv = (base / "sweep.csv").string();
  std::ofstream os(out.csv);
  if (!os) throw IoError("cannot write " + out.csv);
  os << "n_paths,hit,g_inter,g_inner,p_inter,p_inner\n" << std::fixed << std::setprecision(6);
  for (const auto* r : sorted) {
    os << r->n_paths << ',';
    if (r->hit) os << *r->hit;
    os << ',' << r->g_inter << ',' << r->g_inner << ',' << r->p_inter << ',' << r->p_inner << '\n';
  }
  return out;
}

}  // namespace dicr::eval
