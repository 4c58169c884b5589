#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "divfuse/csv_record.hpp"
#include "divfuse/error.hpp"
#include "divfuse/record.hpp"
#include "divfuse/wfdb.hpp"

namespace divfuse {

enum class RecordFormat { csv, wfdb };

inline RecordFormat record_format_from_string(const std::string& s) {
  if (s == "csv") return RecordFormat::csv;
  if (s == "wfdb") return RecordFormat::wfdb;
  fail(errc::invalid_manifest, "unknown format '" + s + "'");
}

struct ManifestEntry {
  std::string path;
  RecordFormat format = RecordFormat::csv;
  double rate = 0.0; // Hz, used for csv entries; wfdb reads it from the header
  ClassLabel label = ClassLabel::Healthy;
};

struct DatasetManifest {
  std::string name;
  std::size_t lead_select = 1; // second lead by convention
  std::vector<ManifestEntry> entries;
  std::string base_dir; // directory of the manifest file, for relative paths

  void validate() const {
    if (name.empty()) fail(errc::invalid_manifest, "name");
    if (entries.empty()) fail(errc::invalid_manifest, "entries");
    std::set<std::string> seen;
    for (const auto& e : entries) {
      if (e.path.empty()) fail(errc::invalid_manifest, "entries[].path");
      if (!seen.insert(e.path).second)
        fail(errc::invalid_manifest, "duplicate path '" + e.path + "'");
      if (e.format == RecordFormat::csv && !(e.rate > 0.0))
        fail(errc::invalid_manifest, "rate_hz for '" + e.path + "'");
    }
  }
};

// Manifest file: JSON with keys name, lead_select, entries[] of
// {path, format, rate_hz, label}.
inline DatasetManifest load_manifest(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(errc::missing_file, path);
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(errc::parse_error, path + ": " + e.what());
  }
  try {
    DatasetManifest manifest;
    manifest.base_dir = std::filesystem::path(path).parent_path().string();
    manifest.name = doc.at("name").get<std::string>();
    manifest.lead_select = doc.value("lead_select", std::size_t{1});
    if (!doc.contains("entries") || !doc["entries"].is_array())
      fail(errc::invalid_manifest, "entries");
    for (const auto& item : doc["entries"]) {
      ManifestEntry entry;
      entry.path = item.at("path").get<std::string>();
      entry.format = record_format_from_string(item.at("format").get<std::string>());
      entry.rate = item.value("rate_hz", 0.0);
      entry.label = class_label_from_string(item.at("label").get<std::string>());
      manifest.entries.push_back(entry);
    }
    manifest.validate();
    return manifest;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::invalid_manifest, path + ": " + e.what());
  }
}

inline void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  nlohmann::json doc;
  doc["name"] = manifest.name;
  doc["lead_select"] = manifest.lead_select;
  doc["entries"] = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    nlohmann::json item;
    item["path"] = e.path;
    item["format"] = e.format == RecordFormat::csv ? "csv" : "wfdb";
    item["rate_hz"] = e.rate;
    item["label"] = to_string(e.label);
    doc["entries"].push_back(item);
  }
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot write " + path);
  out << doc.dump(2) << '\n';
}

inline std::string resolve_entry_path(const DatasetManifest& manifest,
                                      const ManifestEntry& entry) {
  std::filesystem::path p(entry.path);
  if (p.is_absolute() || manifest.base_dir.empty()) return p.string();
  return (std::filesystem::path(manifest.base_dir) / p).string();
}

inline Record load_record(const DatasetManifest& manifest, const ManifestEntry& entry) {
  const std::string path = resolve_entry_path(manifest, entry);
  Record record = entry.format == RecordFormat::csv
                      ? read_csv_record(path, entry.rate, entry.label)
                      : read_wfdb_record(path, entry.label);
  if (manifest.lead_select >= record.leads)
    fail(errc::invalid_manifest, "lead_select " + std::to_string(manifest.lead_select) +
                                     " out of range for '" + entry.path + "' (" +
                                     std::to_string(record.leads) + " leads)");
  return record;
}

inline std::vector<Record> load_dataset(const DatasetManifest& manifest) {
  std::vector<Record> records;
  records.reserve(manifest.entries.size());
  for (const auto& entry : manifest.entries) records.push_back(load_record(manifest, entry));
  return records;
}

} // namespace divfuse
