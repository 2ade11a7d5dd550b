#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cooc::csv {

/// Splits on `sep` without quoting rules; fields are trimmed of spaces, tabs and CR.
std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

/// Strict parsers: the whole field must be consumed. Return false on failure.
bool parse_int(std::string_view s, std::int64_t& out);
bool parse_double(std::string_view s, double& out);

/// Shortest representation that round-trips through parse_double.
std::string format_double(double v);

/// Reads the next line that is neither empty nor a `#` comment. Returns false at EOF.
/// `line_no` is advanced by every physical line consumed.
bool next_record(std::istream& in, std::string& line, std::size_t& line_no);

}  // namespace cooc::csv
