#include "kv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "eot/error.hpp"

namespace eot::detail {

namespace {

[[noreturn]] void bad_value(const KvEntry& entry, std::string_view source,
                            std::string_view expected) {
  throw Error(ErrorCode::kInvalidArgument,
              std::string(source) + ":" + std::to_string(entry.line) + ": " +
                  entry.key + " expects " + std::string(expected) + ", got '" +
                  entry.value + "'");
}

}  // namespace

const KvEntry* KvSection::find(std::string_view key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  constexpr std::string_view kWs = " \t\r\n\v\f";
  const auto first = s.find_first_not_of(kWs);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(kWs);
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const auto comma = value.find(',', pos);
    const auto piece = trim(value.substr(pos, comma == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : comma - pos));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<KvSection> parse_kv(std::string_view text, std::string_view source) {
  std::vector<KvSection> sections(1);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(source) + ":" + std::to_string(line_no) + ": " + what);
    };
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      const auto name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (name.empty()) fail("empty section name");
      sections.push_back(KvSection{name, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    auto key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) fail("empty key");
    auto& current = sections.back();
    if (current.find(key) != nullptr) fail("duplicate key '" + key + "'");
    current.entries.push_back(
        KvEntry{std::move(key), trim(std::string_view(line).substr(eq + 1)), line_no});
  }
  return sections;
}

std::int64_t parse_int(const KvEntry& entry, std::string_view source) {
  std::int64_t value = 0;
  const auto* first = entry.value.data();
  const auto* last = first + entry.value.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) bad_value(entry, source, "an integer");
  return value;
}

std::uint64_t parse_uint(const KvEntry& entry, std::string_view source) {
  std::uint64_t value = 0;
  const auto* first = entry.value.data();
  const auto* last = first + entry.value.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) bad_value(entry, source, "a non-negative integer");
  return value;
}

double parse_double(const KvEntry& entry, std::string_view source) {
  double value = 0;
  const auto* first = entry.value.data();
  const auto* last = first + entry.value.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) bad_value(entry, source, "a number");
  return value;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed for " + path.string());
  return std::move(buf).str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string::npos) nl = content.size();
    std::string line = content.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = nl + 1;
  }
  return lines;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename into " + path.string() + ": " + ec.message());
}

}  // namespace eot::detail
