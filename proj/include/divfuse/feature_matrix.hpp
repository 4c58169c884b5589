#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "divfuse/csv_record.hpp"
#include "divfuse/error.hpp"
#include "divfuse/features.hpp"
#include "divfuse/preprocess.hpp"
#include "divfuse/record.hpp"

namespace divfuse {

// Per-record feature values, records x 9, row-aligned with ids/labels/sources.
struct FeatureMatrix {
  std::vector<double> values; // row-major, rows() x 9
  std::vector<std::string> record_ids;
  std::vector<ClassLabel> labels;
  std::vector<std::string> sources;

  std::size_t rows() const { return record_ids.size(); }
  static constexpr std::size_t cols() { return all_feature_kinds.size(); }

  double at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
  double at(std::size_t row, FeatureKind kind) const {
    return at(row, static_cast<std::size_t>(kind));
  }

  std::vector<double> column(FeatureKind kind) const {
    std::vector<double> out;
    out.reserve(rows());
    for (std::size_t r = 0; r < rows(); ++r) out.push_back(at(r, kind));
    return out;
  }

  void append_row(const std::string& id, const std::string& source, ClassLabel label,
                  const std::vector<double>& row) {
    if (row.size() != cols()) fail(errc::width_mismatch, "feature row width");
    record_ids.push_back(id);
    sources.push_back(source);
    labels.push_back(label);
    values.insert(values.end(), row.begin(), row.end());
  }
};

struct ExtractionReport {
  std::size_t dropped = 0;
  std::vector<std::string> dropped_ids;
};

// Feature rows in window order; windows where any feature is undefined are
// dropped and counted.
inline FeatureMatrix extract_matrix(const std::vector<BeatWindow>& windows,
                                    const std::vector<ClassLabel>& labels,
                                    const std::string& source_name,
                                    const FeatureParams& params,
                                    ExtractionReport* report = nullptr) {
  if (windows.empty()) fail(errc::empty_features, "no windows");
  if (windows.size() != labels.size()) fail(errc::width_mismatch, "windows vs labels");
  FeatureMatrix matrix;
  ExtractionReport local;
  std::vector<double> row(FeatureMatrix::cols());
  for (std::size_t w = 0; w < windows.size(); ++w) {
    bool ok = true;
    for (std::size_t c = 0; c < all_feature_kinds.size(); ++c) {
      try {
        row[c] = extract_feature(windows[w].values, all_feature_kinds[c], params);
      } catch (const Error&) {
        ok = false;
        break;
      }
    }
    if (ok) {
      matrix.append_row(windows[w].source_id, source_name, labels[w], row);
    } else {
      ++local.dropped;
      local.dropped_ids.push_back(windows[w].source_id);
    }
  }
  if (report) *report = local;
  if (matrix.rows() == 0) fail(errc::all_rows_dropped, source_name);
  return matrix;
}

inline void write_feature_csv(const FeatureMatrix& matrix, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot write " + path);
  out << "record_id,source,label";
  for (FeatureKind k : all_feature_kinds) out << ',' << to_string(k);
  out << '\n';
  char buf[40];
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out << matrix.record_ids[r] << ',' << matrix.sources[r] << ','
        << to_string(matrix.labels[r]);
    for (std::size_t c = 0; c < FeatureMatrix::cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", matrix.at(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) fail(errc::io_error, "write failed: " + path);
}

inline FeatureMatrix read_feature_csv(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(errc::missing_file, path);
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(errc::empty_file, path);
  FeatureMatrix matrix;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto cells = detail::split_csv_line(trimmed);
    if (cells.size() != 3 + FeatureMatrix::cols())
      fail(errc::parse_error,
           path + ": line " + std::to_string(line_no) + " has wrong column count");
    std::vector<double> row(FeatureMatrix::cols());
    for (std::size_t c = 0; c < FeatureMatrix::cols(); ++c) {
      if (!detail::parse_double(detail::trim(cells[3 + c]), row[c]))
        fail(errc::parse_error, path + ": line " + std::to_string(line_no) +
                                    ", col " + std::to_string(4 + c));
    }
    matrix.append_row(detail::trim(cells[0]), detail::trim(cells[1]),
                      class_label_from_string(detail::trim(cells[2])), row);
  }
  if (matrix.rows() == 0) fail(errc::empty_file, path);
  return matrix;
}

// Windows round-trip CSV: record_id, source, label, peak_index, w0..w{L-1}.
inline void write_windows_csv(const std::vector<BeatWindow>& windows,
                              const std::vector<ClassLabel>& labels,
                              const std::string& source_name, const std::string& path) {
  if (windows.empty()) fail(errc::empty_features, "no windows");
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot write " + path);
  out << "record_id,source,label,peak_index";
  for (std::size_t i = 0; i < windows[0].values.size(); ++i) out << ",w" << i;
  out << '\n';
  char buf[40];
  for (std::size_t w = 0; w < windows.size(); ++w) {
    out << windows[w].source_id << ',' << source_name << ',' << to_string(labels[w]) << ','
        << windows[w].peak_index;
    for (double v : windows[w].values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

struct WindowSet {
  std::vector<BeatWindow> windows;
  std::vector<ClassLabel> labels;
  std::string source_name;
};

inline WindowSet read_windows_csv(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(errc::missing_file, path);
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(errc::empty_file, path);
  WindowSet set;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto cells = detail::split_csv_line(trimmed);
    if (cells.size() < 5)
      fail(errc::parse_error, path + ": line " + std::to_string(line_no) + " too short");
    BeatWindow window;
    window.source_id = detail::trim(cells[0]);
    set.source_name = detail::trim(cells[1]);
    const ClassLabel label = class_label_from_string(detail::trim(cells[2]));
    double peak = 0.0;
    if (!detail::parse_double(detail::trim(cells[3]), peak))
      fail(errc::parse_error, path + ": line " + std::to_string(line_no) + ", peak_index");
    window.peak_index = static_cast<std::size_t>(peak);
    window.values.reserve(cells.size() - 4);
    for (std::size_t c = 4; c < cells.size(); ++c) {
      double v = 0.0;
      if (!detail::parse_double(detail::trim(cells[c]), v))
        fail(errc::parse_error, path + ": line " + std::to_string(line_no) + ", col " +
                                    std::to_string(c + 1));
      window.values.push_back(v);
    }
    set.windows.push_back(std::move(window));
    set.labels.push_back(label);
  }
  if (set.windows.empty()) fail(errc::empty_file, path);
  return set;
}

} // namespace divfuse
