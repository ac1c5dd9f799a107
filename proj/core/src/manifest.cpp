#include "noiseflood/manifest.hpp"

#include <fstream>
#include <set>

#include "noiseflood/csv.hpp"
#include "noiseflood/errors.hpp"

namespace nflood {
namespace {

const std::vector<std::string> kColumns{"id", "path", "is_adversarial", "source", "target"};
constexpr std::string_view kVersionTag = "# nflood-manifest v";

std::optional<bool> parse_flag(const std::string& text, std::size_t line_no) {
  if (text.empty()) return std::nullopt;
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw DataError("manifest line " + std::to_string(line_no) + ": bad is_adversarial '" +
                  text + "'");
}

std::optional<std::string> optional_field(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return text;
}

}  // namespace

std::vector<ManifestRow> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  const auto base = std::filesystem::absolute(path).parent_path();

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<ManifestRow> rows;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(kVersionTag, 0) == 0) {
      if (line.substr(kVersionTag.size()) != std::to_string(kManifestVersion)) {
        throw DataError("unsupported manifest version: " + line);
      }
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    auto fields = csv::split_record(line);
    if (!header_seen) {
      if (fields != kColumns) {
        throw DataError("manifest header must be id,path,is_adversarial,source,target");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != kColumns.size()) {
      throw DataError("manifest line " + std::to_string(line_no) + ": expected 5 fields");
    }
    ManifestRow row;
    row.id = fields[0];
    row.path = fields[1];
    if (row.id.empty() || row.path.empty()) {
      throw DataError("manifest line " + std::to_string(line_no) + ": empty id or path");
    }
    if (!ids.insert(row.id).second) {
      throw DataError("manifest line " + std::to_string(line_no) + ": duplicate id '" + row.id +
                      "'");
    }
    std::filesystem::path p(row.path);
    row.resolved = p.is_absolute() ? p : (base / p).lexically_normal();
    row.is_adversarial = parse_flag(fields[2], line_no);
    row.source = optional_field(fields[3]);
    row.target = optional_field(fields[4]);
    if (row.is_adversarial.value_or(false) && row.source && row.target &&
        *row.source == *row.target) {
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": adversarial row has source == target");
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw DataError("manifest " + path.string() + " has no header");
  return rows;
}

void save_manifest(const std::vector<ManifestRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << kVersionTag << kManifestVersion << '\n';
  out << csv::join_record(kColumns) << '\n';
  for (const auto& r : rows) {
    const std::string flag =
        r.is_adversarial ? (*r.is_adversarial ? "1" : "0") : std::string();
    out << csv::join_record({r.id, r.path, flag, r.source.value_or(""), r.target.value_or("")})
        << '\n';
  }
}

}  // namespace nflood
