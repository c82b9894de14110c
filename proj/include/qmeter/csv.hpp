#pragma once

// CSV output with shortest round-trip float formatting.  Rows carry no
// timestamps or environment state, so identical computations produce
// byte-identical files.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmeter {

inline std::string csv_cell(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("csv: format failure");
  return {buf, ptr};
}

inline std::string csv_cell(std::uint64_t v) {
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("csv: format failure");
  return {buf, ptr};
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header)
      : n_cols_(header.size()) {
    append_row(header);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != n_cols_)
      throw std::invalid_argument("csv: row width mismatch");
    append_row(cells);
  }

  const std::string& text() const { return text_; }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("csv: cannot open " + path);
    out << text_;
    if (!out) throw std::runtime_error("csv: write failure on " + path);
  }

 private:
  void append_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::size_t n_cols_;
  std::string text_;
};

}  // namespace qmeter
