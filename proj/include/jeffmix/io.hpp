#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jeffmix/errors.hpp"

namespace jeffmix {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kOutputSchemaVersion = 1;

/// Round-trip-exact text form of a double; keeps CSV output reproducible.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Write-then-rename so concurrent study cells never expose partial files.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot open " + tmp.string() + " for writing");
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json_atomic(const std::filesystem::path& path, const ordered_json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

/// Long-format CSV with a fixed column set shared by every study output.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  explicit CsvTable(std::vector<std::string> cols) : columns(std::move(cols)) {}

  void add(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw error("csv row width mismatch");
    rows.push_back(std::move(row));
  }

  /// Canonical order: lexicographic over all cells. Studies may fill rows from
  /// concurrent cells; sorting makes the file independent of scheduling.
  void sort_rows() { std::sort(rows.begin(), rows.end()); }

  std::string to_string() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < columns.size(); ++i)
      out << (i ? "," : "") << columns[i];
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << "\n";
    }
    return out.str();
  }
};

inline CsvTable long_format_table() {
  return CsvTable({"study", "n", "k", "replication", "parameter", "component", "value"});
}

/// Minimal SVG quick-look plot: one or more polylines over a shared grid,
/// optional shaded band. Intended as a visual sanity check, not a figure.
struct SvgSeries {
  std::string name;
  std::string color = "#d62728";
  std::vector<double> y;
};

inline std::string svg_line_plot(const std::string& title, const std::vector<double>& x,
                                 const std::vector<SvgSeries>& series,
                                 const std::vector<double>* band_lo = nullptr,
                                 const std::vector<double>* band_hi = nullptr) {
  const int W = 720, H = 440, ml = 60, mr = 20, mt = 40, mb = 40;
  double xmin = x.front(), xmax = x.back();
  double ymin = 0.0, ymax = -1e300;
  for (const auto& s : series)
    for (double v : s.y) ymax = std::max(ymax, v);
  if (band_hi)
    for (double v : *band_hi) ymax = std::max(ymax, v);
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  ymax *= 1.05;
  auto px = [&](double v) {
    return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  auto py = [&](double v) {
    return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb);
  };
  auto fmt = [](double v) {
    char b[32];
    std::snprintf(b, sizeof(b), "%.6g", v);
    return std::string(b);
  };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
    << "</text>\n";
  if (band_lo && band_hi) {
    s << "<polygon fill=\"#aec7e8\" opacity=\"0.6\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i)
      s << fmt(px(x[i])) << "," << fmt(py((*band_lo)[i])) << " ";
    for (std::size_t i = x.size(); i-- > 0;)
      s << fmt(px(x[i])) << "," << fmt(py((*band_hi)[i])) << " ";
    s << "\"/>\n";
  }
  for (const auto& ser : series) {
    s << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i)
      s << fmt(px(x[i])) << "," << fmt(py(ser.y[i])) << " ";
    s << "\"/>\n";
  }
  // axes
  s << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
    << H - mb << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << ml << "\" y=\"" << H - mb + 16 << "\" font-size=\"11\">" << fmt(xmin)
    << "</text>\n";
  s << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16
    << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(xmax) << "</text>\n";
  s << "<text x=\"" << ml - 4 << "\" y=\"" << mt << "\" text-anchor=\"end\" font-size=\"11\">"
    << fmt(ymax) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace jeffmix
