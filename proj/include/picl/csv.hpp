#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace picl {

// RFC-4180 field quoting: fields containing commas, quotes, or line breaks
// are wrapped in quotes with embedded quotes doubled.
std::string csv_escape(std::string_view field);

// Writes one row terminated by CRLF.
void write_csv_row(std::ostream& out, std::span<const std::string> fields);

// Full parse including quoted fields spanning line breaks. Accepts LF or
// CRLF row endings; a trailing newline does not produce an empty row.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::vector<std::vector<std::string>> read_csv_file(const std::filesystem::path& path);

}  // namespace picl
