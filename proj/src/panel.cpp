#include "proxfact/panel.hpp"

#include <cmath>
#include <set>

#include "proxfact/csv.hpp"
#include "proxfact/errors.hpp"

namespace proxfact {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// A transform row is marked: its label cell is empty or mentions
// "transform", and every remaining cell is an integer code in 1..7.
bool is_fredmd_transform_row(const std::vector<std::string>& cells) {
  if (cells.size() < 2) return false;
  const std::string label = lower(cells[0]);
  if (!label.empty() && label.find("transform") == std::string::npos) return false;
  for (std::size_t j = 1; j < cells.size(); ++j) {
    double v;
    if (!parse_double(cells[j], &v)) return false;
    if (v != std::floor(v) || v < 1 || v > 7) return false;
  }
  return true;
}

}  // namespace

void Panel::validate() const {
  const int n = n_units();
  const int t = n_periods();
  if (n < 1) throw InputError("panel has no units");
  if (t < 2) throw InputError("panel needs at least two periods, got " + std::to_string(t));
  if (static_cast<int>(unit_ids.size()) != n) throw InputError("unit id count mismatch");
  if (static_cast<int>(time_ids.size()) != t) throw InputError("time id count mismatch");
  if (std::set<std::string>(unit_ids.begin(), unit_ids.end()).size() != unit_ids.size())
    throw InputError("unit ids are not distinct");
  if (std::set<std::string>(time_ids.begin(), time_ids.end()).size() != time_ids.size())
    throw InputError("time ids are not distinct");
  if (!values.allFinite()) throw InputError("panel contains non-finite entries");
}

PanelLoadResult load_csv(const std::filesystem::path& path, Orientation orientation,
                         MissingPolicy policy) {
  CsvData data = read_csv_file(path);
  if (data.rows.size() < 2) throw InputError("empty or header-only table: " + path.string());

  const auto& header = data.rows[0];
  if (header.size() < 2) throw InputError("table needs at least one data column: " + path.string());

  if (lower(header[0]) == "sasdate" || is_fredmd_transform_row(data.rows[1])) {
    throw InputError("file looks like a FRED-MD table (transform-code row present); "
                     "use load_fred_md / the fredmd command instead: " + path.string());
  }

  // Parse as written: rows of the file, first column of labels.
  const std::size_t n_cols = header.size() - 1;
  std::vector<std::string> col_ids(header.begin() + 1, header.end());
  std::vector<std::string> row_ids;
  const std::size_t n_rows = data.rows.size() - 1;
  Eigen::MatrixXd raw(n_rows, n_cols);
  std::vector<std::vector<bool>> missing(n_rows, std::vector<bool>(n_cols, false));
  for (std::size_t i = 1; i < data.rows.size(); ++i) {
    const auto& cells = data.rows[i];
    if (cells.size() != header.size())
      throw InputError("row " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) +
                       " cells, expected " + std::to_string(header.size()));
    row_ids.push_back(cells[0]);
    for (std::size_t j = 1; j < cells.size(); ++j) {
      double v = 0;
      if (is_missing_cell(cells[j])) {
        missing[i - 1][j - 1] = true;
      } else if (!parse_double(cells[j], &v)) {
        throw InputError("unparseable cell at row " + std::to_string(i + 1) + " ('" + cells[0] +
                         "'), column " + std::to_string(j + 1) + " ('" + header[j] + "'): '" +
                         cells[j] + "'");
      }
      raw(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) = v;
    }
  }

  // Orient to units in rows.
  Panel panel;
  std::vector<std::vector<bool>> unit_missing;
  if (orientation == Orientation::units_in_rows) {
    panel.values = raw;
    panel.unit_ids = row_ids;
    panel.time_ids = col_ids;
    unit_missing = missing;
  } else {
    panel.values = raw.transpose();
    panel.unit_ids = col_ids;
    panel.time_ids = row_ids;
    unit_missing.assign(n_cols, std::vector<bool>(n_rows, false));
    for (std::size_t i = 0; i < n_rows; ++i)
      for (std::size_t j = 0; j < n_cols; ++j) unit_missing[j][i] = missing[i][j];
  }

  PanelLoadResult result;
  std::vector<int> keep;
  for (int i = 0; i < panel.n_units(); ++i) {
    bool has_missing = false;
    for (bool m : unit_missing[static_cast<std::size_t>(i)]) has_missing |= m;
    if (!std::isfinite(panel.values.row(i).sum())) has_missing = true;
    if (has_missing) {
      if (policy == MissingPolicy::error)
        throw InputError("unit '" + panel.unit_ids[static_cast<std::size_t>(i)] +
                         "' has missing values");
      result.report.push_back("dropped unit '" + panel.unit_ids[static_cast<std::size_t>(i)] +
                              "': missing values");
    } else {
      keep.push_back(i);
    }
  }
  if (keep.empty()) throw InputError("all units dropped due to missing values");

  if (static_cast<int>(keep.size()) != panel.n_units()) {
    Eigen::MatrixXd kept(static_cast<Eigen::Index>(keep.size()), panel.n_periods());
    std::vector<std::string> kept_ids;
    for (std::size_t r = 0; r < keep.size(); ++r) {
      kept.row(static_cast<Eigen::Index>(r)) = panel.values.row(keep[r]);
      kept_ids.push_back(panel.unit_ids[static_cast<std::size_t>(keep[r])]);
    }
    panel.values = std::move(kept);
    panel.unit_ids = std::move(kept_ids);
  }

  panel.validate();
  result.panel = std::move(panel);
  return result;
}

void write_panel_csv(const Panel& panel, const std::filesystem::path& path) {
  std::string out = "unit";
  for (const auto& t : panel.time_ids) out += "," + t;
  out += '\n';
  for (int i = 0; i < panel.n_units(); ++i) {
    out += panel.unit_ids[static_cast<std::size_t>(i)];
    for (int t = 0; t < panel.n_periods(); ++t) out += "," + format_double(panel.values(i, t));
    out += '\n';
  }
  write_text_file(path, out);
}

StandardizeResult standardize(const Panel& panel, StandardizeMode mode) {
  panel.validate();
  const int n = panel.n_units();
  const int t = panel.n_periods();
  StandardizeResult result;
  result.params.mode = mode;
  result.params.means = Eigen::VectorXd::Zero(n);
  result.params.stds = Eigen::VectorXd::Ones(n);
  result.panel = panel;
  if (mode == StandardizeMode::none) return result;

  for (int i = 0; i < n; ++i) {
    const double mean = panel.values.row(i).mean();
    result.params.means(i) = mean;
    if (mode == StandardizeMode::zscore) {
      const double ss = (panel.values.row(i).array() - mean).square().sum();
      const double sd = std::sqrt(ss / (t - 1));
      if (sd <= 0.0)
        throw InputError("unit '" + panel.unit_ids[static_cast<std::size_t>(i)] +
                         "' has zero variance; cannot zscore");
      result.params.stds(i) = sd;
    }
  }
  result.panel = apply_standardization(panel, result.params);
  return result;
}

Panel apply_standardization(const Panel& panel, const StandardizeParams& params) {
  if (params.mode == StandardizeMode::none) return panel;
  if (params.means.size() != panel.n_units())
    throw InputError("standardization parameters sized for a different panel");
  Panel out = panel;
  for (int i = 0; i < panel.n_units(); ++i) {
    out.values.row(i).array() -= params.means(i);
    if (params.mode == StandardizeMode::zscore) out.values.row(i).array() /= params.stds(i);
  }
  return out;
}

std::pair<Panel, Panel> split_train_test(const Panel& panel, double fraction) {
  panel.validate();
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InputError("split fraction must lie strictly inside (0,1), got " +
                     format_double(fraction));
  const int t = panel.n_periods();
  const int t_train = static_cast<int>(std::floor(t * fraction));
  if (t_train < 1 || t_train >= t)
    throw InputError("split fraction " + format_double(fraction) + " leaves an empty side for T=" +
                     std::to_string(t));
  Panel train, test;
  train.values = panel.values.leftCols(t_train);
  test.values = panel.values.rightCols(t - t_train);
  train.unit_ids = panel.unit_ids;
  test.unit_ids = panel.unit_ids;
  train.time_ids.assign(panel.time_ids.begin(), panel.time_ids.begin() + t_train);
  test.time_ids.assign(panel.time_ids.begin() + t_train, panel.time_ids.end());
  train.group_of_unit = panel.group_of_unit;
  test.group_of_unit = panel.group_of_unit;
  return {std::move(train), std::move(test)};
}

StandardizeMode parse_standardize_mode(const std::string& name) {
  if (name == "none") return StandardizeMode::none;
  if (name == "demean") return StandardizeMode::demean;
  if (name == "zscore") return StandardizeMode::zscore;
  throw InputError("unknown standardize mode: " + name);
}

}  // namespace proxfact
