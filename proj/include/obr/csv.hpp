#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace obr {

// Deterministic CSV emission: fixed %.12g formatting, no timestamps, so a
// rerun with the same seed reproduces the file byte for byte.
class CsvWriter {
public:
  using Value = std::variant<double, long, std::string>;

  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path), cols_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open CSV for writing: " + path);
    write_strings(header);
  }

  void row(std::initializer_list<Value> values) {
    if (values.size() != cols_)
      throw std::logic_error("CsvWriter: row width does not match header");
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (const auto& v : values) cells.push_back(format(v));
    write_strings(cells);
  }

private:
  static std::string format(const Value& v) {
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    char buf[64];
    if (std::holds_alternative<long>(v))
      std::snprintf(buf, sizeof buf, "%ld", std::get<long>(v));
    else
      std::snprintf(buf, sizeof buf, "%.12g", std::get<double>(v));
    return buf;
  }

  void write_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
  std::size_t cols_;
};

}  // namespace obr
