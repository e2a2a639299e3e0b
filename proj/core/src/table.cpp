#include "table.hpp"

#include <algorithm>

#include "eot/text.hpp"

namespace eot::detail {

namespace {

std::string pad(const std::string& s, std::size_t width, bool left) {
  const std::size_t len = codepoint_length(s);
  if (len >= width) return s;
  const std::string fill(width - len, ' ');
  return left ? s + fill : fill + s;
}

}  // namespace

std::string TextTable::render() const {
  std::vector<std::size_t> widths(header_.size(), 0);
  for (std::size_t c = 0; c < header_.size(); ++c) widths[c] = codepoint_length(header_[c]);
  for (const auto& row : rows_) {
    if (row.section) continue;
    for (std::size_t c = 0; c < row.cells.size() && c < widths.size(); ++c) {
      widths[c] = std::max(widths[c], codepoint_length(row.cells[c]));
    }
  }
  std::size_t total = 0;
  for (auto w : widths) total += w;
  total += widths.empty() ? 0 : 2 * (widths.size() - 1);

  auto render_cells = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t c = 0; c < widths.size(); ++c) {
      if (c > 0) line += "  ";
      line += pad(c < cells.size() ? cells[c] : std::string(), widths[c], c == 0);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line + "\n";
  };
  const std::string rule = std::string(total, '-') + "\n";

  std::string out = render_cells(header_) + rule;
  for (const auto& row : rows_) {
    if (row.section) {
      const std::string& caption = row.cells.front();
      const std::size_t len = codepoint_length(caption);
      const std::size_t left = total > len ? (total - len) / 2 : 0;
      out += std::string(left, ' ') + caption + "\n";
    } else {
      out += render_cells(row.cells);
    }
  }
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      out += f;
      continue;
    }
    out += '"';
    for (char ch : f) {
      if (ch == '"') out += '"';
      out += ch;
    }
    out += '"';
  }
  return out + "\n";
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

}  // namespace eot::detail
