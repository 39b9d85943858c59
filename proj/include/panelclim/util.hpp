#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace panelclim {

// FNV-1a 64-bit; used for table content hashes and stage caching keys.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL);

std::string hash_hex(std::uint64_t h);

std::uint64_t hash_file(const std::filesystem::path& path);

// Decimal text with 10 significant digits; the one formatting used by all outputs.
std::string format_double(double v);

std::vector<std::string> split(std::string_view line, char sep);

std::string join(const std::vector<std::string>& parts, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string read_text_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view content);

bool parse_double(std::string_view field, double& out);
bool parse_int(std::string_view field, int& out);

// Empty fields and the sentinel "NA" both mean missing.
bool is_missing_field(std::string_view field);

}  // namespace panelclim
