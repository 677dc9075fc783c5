#include "ipva/csv.hpp"

#include <cstdio>
#include <sstream>

#include "ipva/error.hpp"

namespace ipva {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path), path_(path) {
  if (!out_) throw Error(ErrorKind::kConfig, "cannot write '" + path + "'");
}

void CsvWriter::header(const std::vector<std::string>& names) {
  for (const auto& n : names) field(n);
  end_row();
}

CsvWriter& CsvWriter::field(double v) { return field(format_double(v)); }

CsvWriter& CsvWriter::field(long v) { return field(std::to_string(v)); }

CsvWriter& CsvWriter::field(const std::string& v) {
  if (!first_) out_ << ',';
  out_ << v;
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  bool first = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      first = false;
      bool numeric = true;
      try {
        std::size_t used = 0;
        (void)std::stod(cells.at(0), &used);
      } catch (...) {
        numeric = false;
      }
      if (!numeric) {
        table.header = cells;
        continue;
      }
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        row.push_back(std::stod(c));
      } catch (...) {
        throw Error(ErrorKind::kConfig, path + ":" + std::to_string(lineno) +
                                            ": non-numeric cell '" + c + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace ipva
