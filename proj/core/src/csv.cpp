#include "noiseflood/csv.hpp"

#include <cctype>
#include <istream>

#include "noiseflood/errors.hpp"

namespace nflood::csv {

std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw DataError("unterminated quote in CSV record");
  fields.push_back(std::move(field));
  return fields;
}

std::string escape(std::string_view field) {
  const bool needs_quotes =
      field.find_first_of(",\"") != std::string_view::npos ||
      (!field.empty() && (std::isspace(static_cast<unsigned char>(field.front())) ||
                          std::isspace(static_cast<unsigned char>(field.back()))));
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string join_record(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += escape(fields[i]);
  }
  return out;
}

bool next_record_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    return true;
  }
  return false;
}

}  // namespace nflood::csv
