#pragma once

// Minimal CSV table with a `#` metadata block. Numbers use shortest
// round-trip formatting so reruns are bit-identical.

#include <filesystem>
#include <limits>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qhall/config.hpp"
#include "qhall/errors.hpp"

#ifndef QHALL_VERSION
#define QHALL_VERSION "1.0.0"
#endif

namespace qhall::csv {

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> metadata;  ///< lines without the leading "# "
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(const std::vector<Cell>& cells);
  [[nodiscard]] std::size_t column(std::string_view name) const;
  [[nodiscard]] double number(std::size_t row, std::string_view name) const;
};

/// Text cells may not carry separators or line breaks.
inline std::string sanitize(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == ',') c = ';';
    else if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

inline void Table::add_row(const std::vector<Cell>& cells) {
  if (cells.size() != header.size()) {
    throw InvalidArgument("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(header.size()));
  }
  std::vector<std::string> row;
  row.reserve(cells.size());
  for (const auto& c : cells) {
    if (const auto* d = std::get_if<double>(&c)) row.push_back(config::format_number(*d));
    else if (const auto* i = std::get_if<long long>(&c)) row.push_back(std::to_string(*i));
    else row.push_back(sanitize(std::get<std::string>(c)));
  }
  rows.push_back(std::move(row));
}

inline std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InvalidArgument("no column '" + std::string(name) + "'");
}

inline double Table::number(std::size_t row, std::string_view name) const {
  const auto& cell = rows.at(row).at(column(name));
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(cell);
}

/// Standard metadata block: version, command, full config echo.
inline std::vector<std::string> metadata_block(std::string_view command, const config::RunConfig& cfg) {
  std::vector<std::string> meta{std::string("qhall ") + QHALL_VERSION,
                                "command: " + std::string(command), "config:"};
  std::istringstream echo(config::config_echo(cfg));
  std::string line;
  while (std::getline(echo, line)) meta.push_back("  " + line);
  return meta;
}

inline std::string to_string(const Table& t) {
  std::string out;
  for (const auto& m : t.metadata) out += "# " + m + "\n";
  auto join = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  join(t.header);
  for (const auto& r : t.rows) join(r);
  return out;
}

inline void write(const Table& t, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << to_string(t);
  os.flush();
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

/// Strict reader: every data row must match the header's column count.
inline Table parse(std::string_view text) {
  Table t;
  bool have_header = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (have_header) throw ParseError(line_no, "metadata after header");
      line.remove_prefix(1);
      if (!line.empty() && line.front() == ' ') line.remove_prefix(1);
      t.metadata.emplace_back(line);
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.emplace_back(line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != t.header.size()) {
        throw ParseError(line_no, "row has " + std::to_string(cells.size()) + " cells, header has " +
                                      std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw ParseError(line_no, "no header row");
  return t;
}

inline Table read(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

}  // namespace qhall::csv
