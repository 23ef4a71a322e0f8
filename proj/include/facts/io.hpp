#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace facts {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);

// Writes through a sibling temporary file and renames it into place, so a
// reader never observes a partially written file.
void write_file(const fs::path& path, std::string_view contents);

void ensure_directory(const fs::path& dir);

namespace csv {

using Row = std::vector<std::string>;

// RFC 4180 style: comma separated, double-quoted fields may contain commas,
// quotes (doubled) and line breaks.
struct Record {
    Row fields;
    std::size_t line = 0;  // 1-based physical line where the record starts
};

std::vector<Record> parse(std::string_view text);

std::string escape_field(std::string_view field);
std::string format_row(const Row& row);

}  // namespace csv

// Serializes with sorted object keys and every floating-point value printed
// with 17 significant digits, so identical values always produce identical
// bytes and every double round-trips exactly.
std::string canonical_json(const nlohmann::json& value, int indent = 1);

}  // namespace facts
