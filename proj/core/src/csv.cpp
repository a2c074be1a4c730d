#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include <fmt/format.h>

#include "zonalcap/errors.hpp"

namespace zonalcap::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ScenarioError(file, 1, fmt::format("missing column '{}'", name));
}

double Table::number(const Row& row, std::size_t col) const {
  const std::string& s = row.fields[col];
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ScenarioError(file, row.line, fmt::format("column '{}': '{}' is not a finite number", header[col], s));
  return v;
}

int Table::integer(const Row& row, std::size_t col) const {
  const std::string& s = row.fields[col];
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ScenarioError(file, row.line, fmt::format("column '{}': '{}' is not an integer", header[col], s));
  return v;
}

Table read(const std::filesystem::path& path, const std::vector<std::string>& required) {
  Table t;
  t.file = path.filename().string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(t.file, 0, "cannot open file");
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (line_no == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (trim(view).empty()) continue;
    auto fields = split(view);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw ScenarioError(t.file, line_no,
                          fmt::format("expected {} fields, found {}", t.header.size(), fields.size()));
    t.rows.push_back({line_no, std::move(fields)});
  }
  if (!have_header) throw ScenarioError(t.file, 0, "missing header row");
  for (const auto& name : required) t.column(name);
  return t;
}

std::string number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Writer::Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

void Writer::close() {
  out_.close();
  if (!out_) throw std::runtime_error(fmt::format("failed writing {}", path_.string()));
}

}  // namespace zonalcap::csv
