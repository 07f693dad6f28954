#pragma once

#include <string>
#include <vector>

namespace geobeam {

struct Column {
  std::string name;
  std::string unit;
  std::string meaning;
};

// CSV with a commented header block: one line per column naming its unit and meaning.
class CsvTable {
 public:
  explicit CsvTable(std::vector<Column> columns);
  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str(const std::vector<std::string>& preamble = {}) const;
  void write(const std::string& path, const std::vector<std::string>& preamble = {}) const;

 private:
  std::vector<Column> columns_;
  std::vector<std::vector<std::string>> rows_;
};

std::string format_number(double v);

// Writes to path.tmp, then renames over path.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace geobeam
