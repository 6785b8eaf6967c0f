#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace phototopic::detail {

// ASCII lowercasing; bytes outside ASCII pass through untouched.
std::string to_lower(std::string_view s);

std::string_view trim(std::string_view s);

// Splits on `sep`, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char sep);

// Splits on runs of ASCII whitespace, dropping empty fields.
std::vector<std::string_view> split_whitespace(std::string_view s);

// Strips a trailing '\r' so CRLF files read like LF files.
inline std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace phototopic::detail
