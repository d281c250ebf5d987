#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "mayakit/error.hpp"
#include "mayakit/raster.hpp"
#include "mayakit/tiff.hpp"

namespace mayakit {

// Filename convention for dataset directories. The default matches
// tile_<id>_<modality>.tif; the pattern's first capture is the tile id, the
// second the modality token.
struct NamingConvention {
  std::string pattern = R"(^tile_(\d+)_([a-z0-9_]+)\.tif$)";

  static std::string filename(std::uint64_t tile_id, ModalityKind kind) {
    return "tile_" + std::to_string(tile_id) + "_" + modality_name(kind) + ".tif";
  }
  static std::string prob_filename(std::uint64_t tile_id, StructureClass cls,
                                   const std::string& model) {
    return "tile_" + std::to_string(tile_id) + "_prob_" + class_name(cls) + "_" + model + ".tif";
  }
};

inline std::optional<ModalityKind> modality_from_token(const std::string& token) {
  for (ModalityKind kind :
       {ModalityKind::s1, ModalityKind::s2, ModalityKind::als, ModalityKind::mask_building,
        ModalityKind::mask_platform, ModalityKind::mask_aguada}) {
    if (token == modality_name(kind)) return kind;
  }
  // Probability maps carry a trailing model tag: prob_<class>_<model>.
  for (ModalityKind kind :
       {ModalityKind::prob_building, ModalityKind::prob_platform, ModalityKind::prob_aguada}) {
    const std::string prefix = modality_name(kind);
    if (token == prefix || token.rfind(prefix + "_", 0) == 0) return kind;
  }
  return std::nullopt;
}

struct FileReport {
  std::string path;
  std::string kind;    // modality token, or "?" when unrecognized
  std::string status;  // "ok" or "error"
  std::string message;
};

struct ScanResult {
  std::vector<TileRecord> records;  // sorted by tile id
  std::vector<FileReport> reports;  // one per matched file, sorted by path

  bool ok() const {
    return std::all_of(reports.begin(), reports.end(),
                       [](const FileReport& r) { return r.status == "ok"; });
  }
  std::size_t error_count() const {
    return static_cast<std::size_t>(
        std::count_if(reports.begin(), reports.end(),
                      [](const FileReport& r) { return r.status == "error"; }));
  }
};

// Walks one directory, validates every file matching the convention, and
// groups rasters into per-tile records. Validation failures are recorded and
// the scan continues; a failed file never joins a record.
inline ScanResult scan_dataset(const std::filesystem::path& directory,
                               const NamingConvention& naming = {},
                               bool strict_masks = true) {
  if (!std::filesystem::is_directory(directory))
    throw Error(ErrorCode::input_missing, directory.string() + " is not a directory");

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  const std::regex pattern(naming.pattern);
  ScanResult result;
  std::map<std::uint64_t, TileRecord> by_id;
  for (const auto& path : files) {
    std::smatch match;
    const std::string name = path.filename().string();
    if (!std::regex_match(name, match, pattern)) continue;

    FileReport report;
    report.path = path.string();
    report.kind = match[2].str();
    const auto kind = modality_from_token(report.kind);
    if (!kind) {
      report.status = "error";
      report.message = "unrecognized modality token";
      result.reports.push_back(std::move(report));
      continue;
    }
    try {
      const std::uint64_t id = std::stoull(match[1].str());
      Raster raster = read_tiff_file(path);
      validate_modality(raster, *kind, strict_masks);
      TileRecord& record = by_id[id];
      record.tile_id = id;
      if (record.rasters.count(*kind))
        throw Error(ErrorCode::duplicate_modality,
                    "tile " + std::to_string(id) + " already has a " + modality_name(*kind) +
                        " raster");
      record.rasters.emplace(*kind, std::move(raster));
      report.status = "ok";
    } catch (const Error& e) {
      report.status = "error";
      report.message = e.what();
    }
    result.reports.push_back(std::move(report));
  }
  result.records.reserve(by_id.size());
  for (auto& [id, record] : by_id) result.records.push_back(std::move(record));
  return result;
}

// One JSON object per scanned file, newline separated.
inline std::string report_jsonl(const std::vector<FileReport>& reports) {
  auto escape = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out;
  };
  std::string out;
  for (const auto& r : reports) {
    out += "{\"path\":\"" + escape(r.path) + "\",\"kind\":\"" + escape(r.kind) +
           "\",\"status\":\"" + r.status + "\",\"message\":\"" + escape(r.message) + "\"}\n";
  }
  return out;
}

}  // namespace mayakit
