#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace proxfact {

// Raw delimited text, one vector of cells per line. No quoting support;
// panel files are plain numeric tables with simple identifiers.
struct CsvData {
  std::vector<std::vector<std::string>> rows;
};

CsvData read_csv_file(const std::filesystem::path& path, char delim = ',');
CsvData parse_csv(const std::string& text, char delim = ',');

// Shortest representation that round-trips a double exactly.
std::string format_double(double v);
bool parse_double(const std::string& cell, double* out);
bool is_missing_cell(const std::string& cell);  // "", NA, NaN, N/A, "."

// Numeric result table with named columns and an optional leading label
// column; the CSV surface of every experiment and CLI command.
// Serialization is byte-deterministic.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns);
  Table(std::string label_column, std::vector<std::string> columns);

  void add_row(std::vector<double> row);
  void add_row(const std::string& label, std::vector<double> row);
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::string>& row_labels() const { return labels_; }
  std::size_t n_rows() const { return rows_.size(); }
  double at(std::size_t row, const std::string& column) const;
  const std::vector<double>& row(std::size_t i) const { return rows_.at(i); }
  std::vector<double> column(const std::string& name) const;
  int column_index(const std::string& name) const;  // -1 when absent

  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
  // Numeric tables only (no label column).
  static Table read_csv(const std::filesystem::path& path);

 private:
  std::string label_column_;
  std::vector<std::string> labels_;
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace proxfact
