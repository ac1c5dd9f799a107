#include "noiseflood/score_csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>

#include "noiseflood/csv.hpp"
#include "noiseflood/errors.hpp"

namespace nflood {
namespace {

constexpr std::string_view kProvenanceTag = "# nflood-scores v1 ";

std::vector<std::string> header_for(const BandPlan& plan) {
  std::vector<std::string> cols{"id", "path", "is_adversarial", "source", "target"};
  const auto suffixes = plan.column_suffixes();
  for (const auto& s : suffixes) cols.push_back("eps_" + s);
  for (const auto& s : suffixes) cols.push_back("flipped_" + s);
  cols.insert(cols.end(), {"seed", "s", "eps_max"});
  return cols;
}

template <typename T>
T parse_number(const std::string& text, const char* what, std::size_t line_no) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("score CSV line " + std::to_string(line_no) + ": bad " + what + " '" +
                    text + "'");
  }
  return value;
}

bool parse_bool(const std::string& text, const char* what, std::size_t line_no) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw DataError("score CSV line " + std::to_string(line_no) + ": bad " + what + " '" + text +
                  "'");
}

// Band suffix "0_2000" -> edges (0, 2000).
BandPlan plan_from_header(const std::vector<std::string>& cols) {
  std::array<FrequencyBand, kNumBands> bands{
      FrequencyBand::unfiltered(), FrequencyBand::unfiltered(), FrequencyBand::unfiltered(),
      FrequencyBand::unfiltered(), FrequencyBand::unfiltered()};
  for (std::size_t i = 0; i < kNumBands; ++i) {
    const std::string& col = cols[5 + i];
    if (col.rfind("eps_", 0) != 0) throw DataError("score CSV: expected eps_* column, got " + col);
    std::string name = col.substr(4);
    if (name != "unfiltered") {
      const auto us = name.find('_');
      if (us == std::string::npos) throw DataError("score CSV: bad band column " + col);
      name[us] = '-';
    }
    try {
      bands[i] = FrequencyBand::parse(name);
    } catch (const ConfigError& e) {
      throw DataError(std::string("score CSV: ") + e.what());
    }
  }
  try {
    return BandPlan(bands);
  } catch (const ConfigError& e) {
    throw DataError(std::string("score CSV: ") + e.what());
  }
}

}  // namespace

void write_score_csv(const ScoreTable& table, std::ostream& out) {
  if (!table.provenance.empty()) out << kProvenanceTag << table.provenance << '\n';
  out << csv::join_record(header_for(table.plan)) << '\n';
  for (const auto& v : table.rows) {
    std::vector<std::string> fields{
        v.id, v.path,
        v.is_adversarial ? (*v.is_adversarial ? "1" : "0") : std::string(),
        v.source.value_or(""), v.target.value_or("")};
    for (const auto& s : v.scores) fields.push_back(std::to_string(s.epsilon));
    for (const auto& s : v.scores) fields.push_back(s.flipped ? "1" : "0");
    fields.push_back(std::to_string(table.seed));
    fields.push_back(std::to_string(table.step_size));
    fields.push_back(std::to_string(table.epsilon_max));
    out << csv::join_record(fields) << '\n';
  }
}

void write_score_csv(const ScoreTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_score_csv(table, out);
  if (!out) throw Error("write failed for " + path.string());
}

ScoreTable read_score_csv(std::istream& in) {
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool config_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(kProvenanceTag, 0) == 0) {
      table.provenance = line.substr(kProvenanceTag.size());
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    const auto fields = csv::split_record(line);
    if (!header_seen) {
      if (fields.size() != 18) throw DataError("score CSV header must have 18 columns");
      table.plan = plan_from_header(fields);
      if (fields != header_for(table.plan)) throw DataError("score CSV header is malformed");
      header_seen = true;
      continue;
    }
    if (fields.size() != 18) {
      throw DataError("score CSV line " + std::to_string(line_no) + ": expected 18 fields");
    }
    ScoreVector v;
    v.id = fields[0];
    v.path = fields[1];
    if (!fields[2].empty()) v.is_adversarial = parse_bool(fields[2], "is_adversarial", line_no);
    if (!fields[3].empty()) v.source = fields[3];
    if (!fields[4].empty()) v.target = fields[4];
    for (std::size_t i = 0; i < kNumBands; ++i) {
      v.scores[i].epsilon = parse_number<int>(fields[5 + i], "epsilon", line_no);
      v.scores[i].flipped = parse_bool(fields[10 + i], "flipped flag", line_no);
      if (v.scores[i].epsilon <= 0) {
        throw DataError("score CSV line " + std::to_string(line_no) + ": epsilon must be positive");
      }
    }
    const auto seed = parse_number<std::uint64_t>(fields[15], "seed", line_no);
    const int step = parse_number<int>(fields[16], "s", line_no);
    const int eps_max = parse_number<int>(fields[17], "eps_max", line_no);
    if (!config_seen) {
      table.seed = seed;
      table.step_size = step;
      table.epsilon_max = eps_max;
      config_seen = true;
    } else if (seed != table.seed || step != table.step_size || eps_max != table.epsilon_max) {
      throw DataError("score CSV line " + std::to_string(line_no) +
                      ": rows disagree on seed, s, or eps_max");
    }
    table.rows.push_back(std::move(v));
  }
  if (!header_seen) throw DataError("score CSV has no header");
  return table;
}

ScoreTable read_score_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_score_csv(in);
}

std::string file_fingerprint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    hash ^= static_cast<unsigned char>(*it);
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace nflood
