/// @file csv.hpp
/// @brief Deterministic CSV emission: fixed %.17g formatting, header row,
/// newline-terminated rows.
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace marpo {

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("csv: cannot write " + path);
    out_ << header << '\n';
  }

  CsvWriter& field(const std::string& s) {
    sep();
    out_ << s;
    return *this;
  }
  CsvWriter& field(long long v) {
    sep();
    out_ << v;
    return *this;
  }
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    sep();
    out_ << buf;
    return *this;
  }
  void endrow() {
    out_ << '\n';
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) out_ << ',';
    first_ = false;
  }
  std::ofstream out_;
  bool first_ = true;
};

}  // namespace marpo
