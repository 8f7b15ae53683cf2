#include "snseg/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace snseg {

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    cells.push_back(strip(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return cells;
}

std::optional<double> number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) return std::nullopt;
  return v;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::size_t pos = 0;
  int line_no = 0;
  std::size_t width = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = strip(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    std::vector<double> row;
    row.reserve(cells.size());
    std::optional<std::size_t> bad;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto v = number(cells[i]);
      if (!v) {
        bad = i;
        break;
      }
      row.push_back(*v);
    }
    if (bad) {
      if (rows.empty() && header.empty()) {
        for (auto c : cells) header.emplace_back(c);
        width = cells.size();
        continue;
      }
      throw ParameterError("non-numeric cell '" + std::string(cells[*bad]) + "' on line " + std::to_string(line_no));
    }
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw ParameterError("line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                           " cells, expected " + std::to_string(width));
    for (double v : row)
      if (!std::isfinite(v)) throw ParameterError("non-finite value on line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw ParameterError("input needs at least two numeric rows");
  return {TimeSeriesMatrix::from_rows(rows), std::move(header)};
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string format_csv(const TimeSeriesMatrix& ts, const std::vector<std::string>& header) {
  std::string out;
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j) out += ',';
      out += header[j];
    }
    out += '\n';
  }
  char buf[40];
  for (int t = 0; t < ts.n(); ++t) {
    for (int j = 0; j < ts.p(); ++j) {
      if (j) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", ts(t, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace snseg
