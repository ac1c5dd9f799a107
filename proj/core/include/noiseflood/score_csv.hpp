#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "noiseflood/flooding.hpp"

namespace nflood {

/// Contents of a flooding score CSV.
///
/// Layout: an optional `# nflood-scores v1 <json>` provenance line, then
///
///   id,path,is_adversarial,source,target,
///   eps_unfiltered,eps_0_2000,eps_2000_4000,eps_4000_6000,eps_6000_8000,
///   flipped_unfiltered,flipped_0_2000,...,flipped_6000_8000,seed,s,eps_max
///
/// (one physical header line). Band column suffixes follow the BandPlan.
struct ScoreTable {
  BandPlan plan;
  std::uint64_t seed = 0;
  int step_size = kDefaultStepSize;
  int epsilon_max = kDefaultEpsilonMax;
  /// Run configuration serialised as JSON; empty when absent.
  std::string provenance;
  std::vector<ScoreVector> rows;
};

void write_score_csv(const ScoreTable& table, std::ostream& out);
void write_score_csv(const ScoreTable& table, const std::filesystem::path& path);

/// Throws DataError on a malformed header or row, or when rows disagree on
/// seed, s, or eps_max.
ScoreTable read_score_csv(std::istream& in);
ScoreTable read_score_csv(const std::filesystem::path& path);

/// FNV-1a 64 of the file bytes, hex encoded. Used as a dataset fingerprint.
std::string file_fingerprint(const std::filesystem::path& path);

}  // namespace nflood
