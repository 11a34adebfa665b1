#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cyclofrag::csv {

// Shortest decimal string that parses back to the same double, so files
// round-trip bit-for-bit and stay readable.
std::string format_double(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Data row numbers as they appeared in the file (1-based, header included),
  // for error messages that survive comment/blank-line skipping.
  std::vector<std::size_t> line_numbers;

  // Case-insensitive header lookup.
  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name, const std::string& path) const;
};

// Reads a whole CSV file. Lines starting with '#' and blank lines are skipped.
// Fields may be double-quoted; "" inside quotes is an escaped quote.
Table read_file(const std::filesystem::path& path);

// Splits one CSV record (no trailing newline) into fields.
std::vector<std::string> split_record(std::string_view line);

}  // namespace cyclofrag::csv
