#include "popmatch/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>

namespace popmatch {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty file: " + path);
  table.header = split_line(line);
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != table.header.size())
      throw ValidationError(path + ": row " + std::to_string(row_number) +
                            " has " + std::to_string(cells.size()) +
                            " cells, expected " +
                            std::to_string(table.header.size()));
    table.rows.push_back(std::move(cells));
  }
  return table;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path), path_(path) {
  if (!out_) throw Error("cannot open file for writing: " + path);
}

CsvWriter::~CsvWriter() {
  if (out_.is_open()) out_.close();
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
  if (!out_) throw Error("write failed: " + path_);
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw Error("close failed: " + path_);
}

std::string format_double(double v) {
  // %.17g always round-trips; prefer the shortest precision that does.
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

std::string format_int(long long v) { return std::to_string(v); }

double parse_double_field(const std::string& cell, const std::string& column,
                          std::size_t row_number) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
    throw ValidationError("row " + std::to_string(row_number) + ", field '" +
                          column + "': cannot parse '" + cell +
                          "' as a number");
  return v;
}

long long parse_int_field(const std::string& cell, const std::string& column,
                          std::size_t row_number) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(cell.c_str(), &end, 10);
  if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
    throw ValidationError("row " + std::to_string(row_number) + ", field '" +
                          column + "': cannot parse '" + cell +
                          "' as an integer");
  return v;
}

}  // namespace popmatch
