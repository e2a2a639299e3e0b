#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace eot::detail {

/// Column-aligned plain-text table. The first column is left-aligned, the
/// rest right-aligned. Section rows span the table as a centered caption.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) { rows_.push_back({false, std::move(cells)}); }
  void add_section(std::string caption) { rows_.push_back({true, {std::move(caption)}}); }

  std::string render() const;

 private:
  struct Row {
    bool section;
    std::vector<std::string> cells;
  };
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

/// RFC 4180 style: quote fields containing the delimiter, quotes or newlines.
std::string csv_line(const std::vector<std::string>& fields);

std::string fixed(double value, int decimals);

}  // namespace eot::detail
