#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace ipva {

// Minimal CSV writer with fixed 17-significant-digit formatting so that
// identical runs produce byte-identical files.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);

  void header(const std::vector<std::string>& names);
  CsvWriter& field(double v);
  CsvWriter& field(long v);
  CsvWriter& field(int v) { return field(static_cast<long>(v)); }
  CsvWriter& field(std::size_t v) { return field(static_cast<long>(v)); }
  CsvWriter& field(const std::string& v);
  CsvWriter& field(const char* v) { return field(std::string(v)); }
  void end_row();

 private:
  std::ofstream out_;
  std::string path_;
  bool first_ = true;
};

std::string format_double(double v);

// Numeric table; the header row is returned separately.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::string& path);

}  // namespace ipva
