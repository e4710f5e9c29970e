#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace teamrank::csv {

// Comma-separated, mandatory header row, RFC 4180 quoting, '.' decimal separator.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  // Column position, or npos.
  std::size_t column(std::string_view name) const noexcept;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Throws EmptyFile when there is no header, MalformedRow on a ragged or badly quoted row.
Table parse(std::string_view text);
Table read(const std::filesystem::path& path);

std::string escape(std::string_view field);
// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
// Strict full-field parse; false on trailing junk or empty input.
bool parse_double(std::string_view text, double& out);
bool parse_u64(std::string_view text, unsigned long long& out);

std::string slurp(const std::filesystem::path& path);

}  // namespace teamrank::csv
