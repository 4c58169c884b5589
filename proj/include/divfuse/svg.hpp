#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "divfuse/error.hpp"
#include "divfuse/kde.hpp"
#include "divfuse/metrics.hpp"

namespace divfuse {

inline constexpr std::size_t k_density_curve_points = 512;

namespace svg_detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct Box {
  double x0, y0, width, height; // plot area in SVG coordinates
};

// Maps data coordinates into an SVG plot box (y axis flipped).
struct Mapper {
  Box box;
  double x_min, x_max, y_min, y_max;

  double x(double v) const {
    return box.x0 + (v - x_min) / (x_max - x_min) * box.width;
  }
  double y(double v) const {
    return box.y0 + box.height - (v - y_min) / (y_max - y_min) * box.height;
  }
};

inline void polyline(std::string& out, const Mapper& map,
                     const std::vector<std::pair<double, double>>& points,
                     const char* color, const char* dash = nullptr) {
  out += "<polyline fill=\"none\" stroke=\"";
  out += color;
  out += "\" stroke-width=\"1.5\"";
  if (dash) {
    out += " stroke-dasharray=\"";
    out += dash;
    out += "\"";
  }
  out += " points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) out += ' ';
    out += fmt(map.x(points[i].first)) + "," + fmt(map.y(points[i].second));
  }
  out += "\"/>\n";
}

inline void text(std::string& out, double x, double y, const std::string& s,
                 const char* anchor = "start", int size = 12) {
  out += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-size=\"" +
         std::to_string(size) + "\" font-family=\"sans-serif\" text-anchor=\"";
  out += anchor;
  out += "\">" + s + "</text>\n";
}

inline void axes(std::string& out, const Box& box, const std::string& x_label,
                 const std::string& y_label) {
  out += "<rect x=\"" + fmt(box.x0) + "\" y=\"" + fmt(box.y0) + "\" width=\"" +
         fmt(box.width) + "\" height=\"" + fmt(box.height) +
         "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  text(out, box.x0 + box.width / 2, box.y0 + box.height + 28, x_label, "middle");
  out += "<text x=\"" + fmt(box.x0 - 28) + "\" y=\"" + fmt(box.y0 + box.height / 2) +
         "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 " +
         fmt(box.x0 - 28) + " " + fmt(box.y0 + box.height / 2) + ")\">" + y_label +
         "</text>\n";
}

inline void write_file(const std::string& content, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot write " + path);
  out << content;
  if (!out) fail(errc::io_error, "write failed: " + path);
}

} // namespace svg_detail

// Shared x-range for a pair of KDE models: data extent padded by 3 bandwidths.
inline std::pair<double, double> density_plot_range(const KdeModel& a, const KdeModel& b) {
  const auto [a_min, a_max] = std::minmax_element(a.points.begin(), a.points.end());
  const auto [b_min, b_max] = std::minmax_element(b.points.begin(), b.points.end());
  const double lo = std::min(*a_min - 3.0 * a.bandwidth, *b_min - 3.0 * b.bandwidth);
  const double hi = std::max(*a_max + 3.0 * a.bandwidth, *b_max + 3.0 * b.bandwidth);
  return {lo, hi};
}

// Two panels of KDE curves: reference vs source before fusion, and after.
// Each curve is sampled at k_density_curve_points points.
inline void render_density_svg(const KdeModel& before_reference, const KdeModel& before_source,
                               const KdeModel& after_reference, const KdeModel& after_source,
                               const std::string& path, const std::string& title = "feature") {
  using namespace svg_detail;
  const double width = 960.0;
  const double height = 400.0;
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                    "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    fmt(width) + "\" height=\"" + fmt(height) + "\" viewBox=\"0 0 " +
                    fmt(width) + " " + fmt(height) + "\">\n";
  text(out, width / 2, 20, title + " density before and after fusion", "middle", 14);

  const std::pair<const KdeModel*, const KdeModel*> panels[2] = {
      {&before_reference, &before_source},
      {&after_reference, &after_source},
  };
  const char* panel_titles[2] = {"before fusion", "after fusion"};
  for (int p = 0; p < 2; ++p) {
    const Box box{70.0 + 460.0 * p, 50.0, 380.0, 280.0};
    const KdeModel& ref = *panels[p].first;
    const KdeModel& src = *panels[p].second;
    const auto [lo, hi] = density_plot_range(ref, src);
    const auto ref_curve = sample_density_curve(ref, lo, hi, k_density_curve_points);
    const auto src_curve = sample_density_curve(src, lo, hi, k_density_curve_points);
    double y_max = 0.0;
    for (const auto& pt : ref_curve) y_max = std::max(y_max, pt.second);
    for (const auto& pt : src_curve) y_max = std::max(y_max, pt.second);
    if (!(y_max > 0.0)) y_max = 1.0;
    const Mapper map{box, lo, hi, 0.0, y_max * 1.05};
    axes(out, box, "value", "density");
    text(out, box.x0 + box.width / 2, box.y0 - 8, panel_titles[p], "middle");
    polyline(out, map, ref_curve, "#1f77b4");
    polyline(out, map, src_curve, "#d62728");
    text(out, box.x0 + 8, box.y0 + 16, "reference", "start", 11);
    text(out, box.x0 + 8, box.y0 + 30, "source", "start", 11);
  }
  out += "</svg>\n";
  write_file(out, path);
}

struct LabeledRoc {
  std::string label;
  RocCurve curve;
};

// Overlaid ROC polylines with the chance diagonal; each legend entry carries
// the curve's AUC to three decimals.
inline void render_roc_svg(const std::vector<LabeledRoc>& curves, const std::string& path) {
  using namespace svg_detail;
  if (curves.empty()) fail(errc::invalid_spec, "no ROC curves to render");
  const double width = 520.0;
  const double height = 540.0;
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                    "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    fmt(width) + "\" height=\"" + fmt(height) + "\" viewBox=\"0 0 " +
                    fmt(width) + " " + fmt(height) + "\">\n";
  const Box box{70.0, 40.0, 400.0, 400.0};
  const Mapper map{box, 0.0, 1.0, 0.0, 1.0};
  axes(out, box, "false positive rate", "true positive rate");
  text(out, box.x0 + box.width / 2, 24, "receiver operating characteristic", "middle", 14);
  polyline(out, map, {{0.0, 0.0}, {1.0, 1.0}}, "#999999", "4,4");

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = palette[i % 5];
    polyline(out, map, curves[i].curve.points, color);
    char legend[160];
    std::snprintf(legend, sizeof legend, "%s (AUC %.3f)", curves[i].label.c_str(),
                  curves[i].curve.auc);
    out += "<rect x=\"" + fmt(box.x0 + 10) + "\" y=\"" +
           fmt(box.y0 + box.height - 20.0 - 18.0 * static_cast<double>(i)) +
           "\" width=\"12\" height=\"4\" fill=\"" + color + "\"/>\n";
    text(out, box.x0 + 28, box.y0 + box.height - 14.0 - 18.0 * static_cast<double>(i),
         legend, "start", 11);
  }
  out += "</svg>\n";
  write_file(out, path);
}

} // namespace divfuse
