#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "noiseflood/classifier.hpp"

namespace nflood {

/// One dataset entry. `path` is stored as written; `resolved` is absolute
/// after load_manifest (manifest-relative paths resolve against the
/// manifest's directory).
struct ManifestRow {
  std::string id;
  std::string path;
  std::filesystem::path resolved;
  std::optional<bool> is_adversarial;
  std::optional<Label> source;
  std::optional<Label> target;
};

inline constexpr int kManifestVersion = 1;

/// Reads a manifest CSV:
///
///   # nflood-manifest v1
///   id,path,is_adversarial,source,target
///
/// The version line is optional; an unknown version is rejected. Throws
/// DataError on duplicate ids, malformed rows, or adversarial rows whose
/// source equals their target.
std::vector<ManifestRow> load_manifest(const std::filesystem::path& path);

void save_manifest(const std::vector<ManifestRow>& rows,
                   const std::filesystem::path& path);

}  // namespace nflood
