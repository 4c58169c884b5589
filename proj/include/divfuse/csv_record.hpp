#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "divfuse/error.hpp"
#include "divfuse/record.hpp"

namespace divfuse {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline bool parse_double(const std::string& s, double& out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  out = std::strtod(begin, &end);
  if (end == begin || errno == ERANGE) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

} // namespace detail

// Numeric CSV, one sample per row, one column per lead, optional single
// header row. Columns become leads in order.
inline Record read_csv_record(const std::string& path, double rate, ClassLabel label) {
  if (!std::filesystem::exists(path)) fail(errc::missing_file, path);
  if (!(rate > 0.0)) fail(errc::invalid_rate, "rate must be > 0");
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t n_cols = 0;
  bool first_data_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto cells = detail::split_csv_line(trimmed);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!detail::parse_double(detail::trim(cells[c]), row[c])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (!first_data_seen && line_no == 1) continue; // header row
      fail(errc::parse_error, path + ": line " + std::to_string(line_no) +
                                  " is not numeric");
    }
    for (std::size_t c = 0; c < row.size(); ++c)
      if (!std::isfinite(row[c]))
        fail(errc::non_finite_value, path + ": row " + std::to_string(line_no) +
                                         ", col " + std::to_string(c + 1));
    if (!first_data_seen) {
      n_cols = row.size();
      first_data_seen = true;
    } else if (row.size() != n_cols) {
      fail(errc::parse_error, path + ": row " + std::to_string(line_no) +
                                  " has " + std::to_string(row.size()) +
                                  " columns, expected " + std::to_string(n_cols));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(errc::empty_file, path);
  if (rows.size() < 2) fail(errc::parse_error, path + ": need at least 2 samples");

  Record record;
  record.id = std::filesystem::path(path).stem().string();
  record.leads = n_cols;
  record.samples = rows.size();
  record.rate = rate;
  record.label = label;
  record.signal.resize(record.leads * record.samples);
  for (std::size_t s = 0; s < record.samples; ++s)
    for (std::size_t l = 0; l < record.leads; ++l)
      record.signal[l * record.samples + s] = rows[s][l];
  record.validate();
  return record;
}

// Writes samples x leads with full round-trip precision, no header.
inline void write_csv_record(const Record& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot write " + path);
  char buf[40];
  for (std::size_t s = 0; s < record.samples; ++s) {
    for (std::size_t l = 0; l < record.leads; ++l) {
      std::snprintf(buf, sizeof buf, "%.17g", record.at(l, s));
      out << buf;
      if (l + 1 < record.leads) out << ',';
    }
    out << '\n';
  }
  if (!out) fail(errc::io_error, "write failed: " + path);
}

} // namespace divfuse
