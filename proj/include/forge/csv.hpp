#pragma once

// Minimal reader for the small comma-separated tables the tool ingests
// (probe results, design points, calibration anchors). No quoting; blank
// lines and lines starting with '#' are skipped; the first remaining line is
// the header.

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "forge/error.hpp"
#include "forge/units.hpp"

namespace forge {

struct CsvRow {
  std::size_t line = 0;
  std::map<std::string, std::string> cells;

  bool has(const std::string& col) const {
    auto it = cells.find(col);
    return it != cells.end() && !it->second.empty();
  }

  const std::string& text(const std::string& col) const {
    auto it = cells.find(col);
    if (it == cells.end() || it->second.empty()) throw ParseError("missing value", line, col);
    return it->second;
  }

  double number(const std::string& col) const {
    try {
      return parse_scaled(text(col));
    } catch (const ParseError&) {
      throw;
    } catch (const DomainError& e) {
      throw ParseError(e.what(), line, col);
    }
  }

  int integer(const std::string& col) const {
    const double v = number(col);
    if (v != static_cast<double>(static_cast<long long>(v))) throw ParseError("expected an integer", line, col);
    return static_cast<int>(v);
  }
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline CsvTable parse_csv(const std::string& text, const std::vector<std::string>& required) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cells = detail::split_csv_line(t);
    if (table.header.empty()) {
      table.header = cells;
      for (const auto& col : required)
        if (std::find(table.header.begin(), table.header.end(), col) == table.header.end())
          throw ParseError("header lacks required column", n, col);
      continue;
    }
    if (cells.size() > table.header.size())
      throw ParseError("row has " + std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(table.header.size()), n);
    CsvRow row;
    row.line = n;
    for (std::size_t i = 0; i < table.header.size(); ++i)
      row.cells[table.header[i]] = i < cells.size() ? cells[i] : std::string{};
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ParseError("empty table");
  return table;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline CsvTable load_csv(const std::string& path, const std::vector<std::string>& required) {
  const std::string text = read_file(path);
  try {
    return parse_csv(text, required);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace forge
