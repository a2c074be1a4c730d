#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace zonalcap::csv {

struct Row {
  std::size_t line = 0;  // 1-based line in the file
  std::vector<std::string> fields;
};

class Table {
 public:
  std::string file;
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column index by name; throws ScenarioError when absent.
  std::size_t column(std::string_view name) const;
  double number(const Row& row, std::size_t col) const;
  int integer(const Row& row, std::size_t col) const;
  const std::string& text(const Row& row, std::size_t col) const { return row.fields[col]; }
};

/// Reads a comma-separated file with a header row. Every row must have as many fields as the header,
/// and every name in `required` must appear in the header.
Table read(const std::filesystem::path& path, const std::vector<std::string>& required);

/// Shortest decimal text that parses back to the same double.
std::string number(double v);

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path);
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace zonalcap::csv
