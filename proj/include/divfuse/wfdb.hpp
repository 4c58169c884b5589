#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "divfuse/csv_record.hpp"
#include "divfuse/error.hpp"
#include "divfuse/record.hpp"

namespace divfuse {

// Reader for the format-16 subset of the waveform-database layout: a text
// header (record line: name, n_leads, rate, n_samples; one line per lead:
// file, format, gain, baseline) plus a little-endian int16 data file with
// samples interleaved by lead. Gain tokens of the fuller header dialect,
// "gain(baseline)/units", are accepted too.
inline Record read_wfdb_record(const std::string& header_path, ClassLabel label) {
  if (!std::filesystem::exists(header_path)) fail(errc::missing_file, header_path);
  std::ifstream in(header_path);
  if (!in) fail(errc::io_error, "cannot open " + header_path);

  std::string line;
  std::size_t n_leads = 0;
  std::size_t n_samples = 0;
  double rate = 0.0;
  std::string record_name;
  bool record_line_seen = false;
  std::string data_file;
  std::vector<double> gains;
  std::vector<double> baselines;

  while (std::getline(in, line)) {
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    std::stringstream ss(trimmed);
    if (!record_line_seen) {
      std::string name_token;
      ss >> name_token >> n_leads >> rate >> n_samples;
      if (ss.fail()) fail(errc::parse_error, header_path + ": bad record line");
      record_name = name_token.substr(0, name_token.find('/'));
      record_line_seen = true;
      continue;
    }
    if (gains.size() == n_leads) break; // extra info lines follow the signal lines
    std::string file_token;
    std::string format_token;
    std::string gain_token;
    ss >> file_token >> format_token >> gain_token;
    if (ss.fail()) fail(errc::parse_error, header_path + ": bad signal line");
    // format may carry xN/ :N/+N modifiers; the leading integer is the code
    const int format_code = std::atoi(format_token.c_str());
    if (format_code != 16) fail(errc::unsupported_format, std::to_string(format_code));
    if (data_file.empty())
      data_file = file_token;
    else if (data_file != file_token)
      fail(errc::parse_error, header_path + ": all leads must share one data file");

    double gain = 0.0;
    double baseline = 0.0;
    const auto paren = gain_token.find('(');
    if (paren != std::string::npos) {
      gain = std::strtod(gain_token.substr(0, paren).c_str(), nullptr);
      baseline = std::strtod(gain_token.substr(paren + 1).c_str(), nullptr);
    } else {
      gain = std::strtod(gain_token.c_str(), nullptr);
      std::string baseline_token;
      if (ss >> baseline_token) baseline = std::strtod(baseline_token.c_str(), nullptr);
    }
    if (!(gain > 0.0)) fail(errc::parse_error, header_path + ": gain must be > 0");
    gains.push_back(gain);
    baselines.push_back(baseline);
  }

  if (!record_line_seen) fail(errc::parse_error, header_path + ": empty header");
  if (gains.size() != n_leads)
    fail(errc::parse_error, header_path + ": expected " + std::to_string(n_leads) +
                                " signal lines, got " + std::to_string(gains.size()));
  if (n_leads < 1 || n_samples < 2 || !(rate > 0.0))
    fail(errc::parse_error, header_path + ": bad record dimensions");

  const auto data_path = std::filesystem::path(header_path).parent_path() / data_file;
  if (!std::filesystem::exists(data_path)) fail(errc::missing_data_file, data_path.string());
  const auto file_size = std::filesystem::file_size(data_path);
  const std::uintmax_t expected = static_cast<std::uintmax_t>(2) * n_leads * n_samples;
  if (file_size != expected)
    fail(errc::header_data_mismatch,
         data_path.string() + ": " + std::to_string(file_size) + " bytes, header declares " +
             std::to_string(expected));

  std::ifstream data(data_path, std::ios::binary);
  if (!data) fail(errc::io_error, "cannot open " + data_path.string());
  std::vector<unsigned char> raw(file_size);
  data.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(file_size));
  if (!data) fail(errc::io_error, "short read: " + data_path.string());

  Record record;
  record.id = record_name;
  record.leads = n_leads;
  record.samples = n_samples;
  record.rate = rate;
  record.label = label;
  record.signal.resize(n_leads * n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (std::size_t l = 0; l < n_leads; ++l) {
      const std::size_t off = 2 * (s * n_leads + l);
      const std::uint16_t lo = raw[off];
      const std::uint16_t hi = raw[off + 1];
      const auto value = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
      record.signal[l * n_samples + s] =
          (static_cast<double>(value) - baselines[l]) / gains[l];
    }
  }
  record.validate();
  return record;
}

} // namespace divfuse
