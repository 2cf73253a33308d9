#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gridrisk::csv {

// One non-blank, non-comment line split on ','. Fields are trimmed.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// Reads a UTF-8 CSV file. Text after '#' is a comment; blank lines are skipped.
// Throws IoError if the file cannot be opened.
std::string read_text(const std::filesystem::path& path);
std::vector<Row> read_rows(const std::filesystem::path& path);
std::vector<Row> parse_rows(std::string_view text);

double parse_double(const std::string& field, const std::string& source, std::size_t line);
long long parse_int(const std::string& field, const std::string& source, std::size_t line);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

// True if the row looks like a header (its last field is not numeric).
bool is_header(const Row& row);

// Throws IoError on failure.
void write_file(const std::filesystem::path& path, const std::string& contents);

// FNV-1a 64-bit digest of the file bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace gridrisk::csv
