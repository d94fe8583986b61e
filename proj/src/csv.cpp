#include "proxfact/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "proxfact/errors.hpp"

namespace proxfact {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

CsvData parse_csv(const std::string& text, char delim) {
  CsvData data;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ls(line);
    while (std::getline(ls, cell, delim)) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == delim) cells.push_back("");
    data.rows.push_back(std::move(cells));
  }
  return data;
}

CsvData read_csv_file(const std::filesystem::path& path, char delim) {
  return parse_csv(read_text_file(path), delim);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

std::string format_double(double v) {
  // Try increasing precision until the value round-trips.
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

bool parse_double(const std::string& cell, double* out) {
  if (cell.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') return false;
  *out = v;
  return true;
}

bool is_missing_cell(const std::string& cell) {
  if (cell.empty() || cell == ".") return true;
  std::string u;
  u.reserve(cell.size());
  for (char c : cell) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return u == "NA" || u == "NAN" || u == "N/A" || u == "NULL";
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

Table::Table(std::string label_column, std::vector<std::string> columns)
    : label_column_(std::move(label_column)), columns_(std::move(columns)) {}

void Table::add_row(std::vector<double> row) {
  if (!label_column_.empty())
    throw InputError("table has a label column; rows need labels");
  if (row.size() != columns_.size())
    throw InputError("table row width mismatch: got " + std::to_string(row.size()) +
                     ", expected " + std::to_string(columns_.size()));
  rows_.push_back(std::move(row));
}

void Table::add_row(const std::string& label, std::vector<double> row) {
  if (label_column_.empty()) throw InputError("table has no label column");
  if (row.size() != columns_.size())
    throw InputError("table row width mismatch: got " + std::to_string(row.size()) +
                     ", expected " + std::to_string(columns_.size()));
  labels_.push_back(label);
  rows_.push_back(std::move(row));
}

int Table::column_index(const std::string& name) const {
  auto it = std::find(columns_.begin(), columns_.end(), name);
  return it == columns_.end() ? -1 : static_cast<int>(it - columns_.begin());
}

double Table::at(std::size_t row, const std::string& column) const {
  int c = column_index(column);
  if (c < 0) throw InputError("no such column: " + column);
  return rows_.at(row).at(static_cast<std::size_t>(c));
}

std::vector<double> Table::column(const std::string& name) const {
  int c = column_index(name);
  if (c < 0) throw InputError("no such column: " + name);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[static_cast<std::size_t>(c)]);
  return out;
}

std::string Table::to_csv() const {
  std::string out;
  if (!label_column_.empty()) out += label_column_ + ",";
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (j) out += ',';
    out += columns_[j];
  }
  out += '\n';
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!label_column_.empty()) out += labels_[i] + ",";
    for (std::size_t j = 0; j < rows_[i].size(); ++j) {
      if (j) out += ',';
      out += format_double(rows_[i][j]);
    }
    out += '\n';
  }
  return out;
}

void Table::write_csv(const std::filesystem::path& path) const {
  write_text_file(path, to_csv());
}

Table Table::read_csv(const std::filesystem::path& path) {
  CsvData data = read_csv_file(path);
  if (data.rows.empty()) throw InputError("empty table: " + path.string());
  Table t(data.rows[0]);
  for (std::size_t i = 1; i < data.rows.size(); ++i) {
    std::vector<double> row;
    row.reserve(data.rows[i].size());
    for (std::size_t j = 0; j < data.rows[i].size(); ++j) {
      double v;
      if (!parse_double(data.rows[i][j], &v))
        throw InputError("unparseable cell at row " + std::to_string(i + 1) + ", column " +
                         std::to_string(j + 1) + " in " + path.string());
      row.push_back(v);
    }
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace proxfact
