#pragma once

// Plain-text key/value configuration files:
//
//   # comment
//   key = value
//   [section]
//   key = value
//
// Entries before the first section header belong to an unnamed section.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace eot::detail {

struct KvEntry {
  std::string key;
  std::string value;
  std::size_t line;
};

struct KvSection {
  std::string name;
  std::size_t line = 0;
  std::vector<KvEntry> entries;

  const KvEntry* find(std::string_view key) const;
};

std::vector<KvSection> parse_kv(std::string_view text, std::string_view source);

std::string trim(std::string_view s);
std::vector<std::string> split_list(std::string_view value);

std::int64_t parse_int(const KvEntry& entry, std::string_view source);
std::uint64_t parse_uint(const KvEntry& entry, std::string_view source);
double parse_double(const KvEntry& entry, std::string_view source);
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace eot::detail
