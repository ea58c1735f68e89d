#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "popmatch/error.hpp"

namespace popmatch {

// CSV conventions used across the project: header row, UTF-8, comma
// separator, missing values encoded as the empty string. Fields never
// contain commas or quotes, so no quoting layer is needed.

class CsvTable {
 public:
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }

  int require_column(const std::string& name) const {
    int c = column(name);
    if (c < 0) throw ValidationError("missing required column '" + name + "'");
    return c;
  }
};

CsvTable read_csv(const std::string& path);

/// Streaming writer; keeps float formatting deterministic so that identical
/// inputs yield byte-identical files.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void write_row(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
};

/// Shortest decimal form that round-trips the double exactly.
std::string format_double(double v);

std::string format_int(long long v);

double parse_double_field(const std::string& cell, const std::string& column,
                          std::size_t row_number);
long long parse_int_field(const std::string& cell, const std::string& column,
                          std::size_t row_number);

inline bool is_missing(const std::string& cell) { return cell.empty(); }

}  // namespace popmatch
