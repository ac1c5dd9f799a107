#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace nflood::csv {

/// Splits one CSV record. Fields may be double-quoted; "" inside quotes is a
/// literal quote. Embedded newlines are not supported.
std::vector<std::string> split_record(std::string_view line);

/// Quotes a field only when it contains a comma, quote, or leading/trailing
/// whitespace.
std::string escape(std::string_view field);

std::string join_record(const std::vector<std::string>& fields);

/// Reads the next line that is neither blank nor a '#' comment. Strips a
/// trailing '\r'. Returns false at end of stream.
bool next_record_line(std::istream& in, std::string& line);

}  // namespace nflood::csv
