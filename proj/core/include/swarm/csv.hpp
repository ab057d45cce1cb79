#pragma once

#include <istream>
#include <string>
#include <vector>

namespace swarm {

/// Comma-separated table with a header row. Fields are unquoted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name, or -1.
  int column(const std::string& name) const;
  const std::string& at(std::size_t row, const std::string& name) const;
};

std::vector<std::string> split_csv_line(const std::string& line);

/// Throws std::runtime_error on an empty input or a row whose width differs
/// from the header.
CsvTable parse_csv(std::istream& in);
CsvTable parse_csv_string(const std::string& text);
CsvTable read_csv_file(const std::string& path);

std::string join_csv(const std::vector<std::string>& fields);

}  // namespace swarm
