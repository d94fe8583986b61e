#include "proxfact/fredmd.hpp"

#include <cmath>

#include "proxfact/csv.hpp"
#include "proxfact/errors.hpp"

namespace proxfact {

namespace {

Eigen::VectorXd diff(const Eigen::VectorXd& x) {
  return x.tail(x.size() - 1) - x.head(x.size() - 1);
}

}  // namespace

int transform_order(int code) {
  switch (code) {
    case 1:
    case 4:
      return 0;
    case 2:
    case 5:
      return 1;
    case 3:
    case 6:
    case 7:
      return 2;
    default:
      throw InputError("unknown transform code " + std::to_string(code));
  }
}

Eigen::VectorXd apply_transform_code(const Eigen::VectorXd& series, int code) {
  const int order = transform_order(code);
  if (series.size() <= order)
    throw InputError("series too short for transform code " + std::to_string(code));
  switch (code) {
    case 1:
      return series;
    case 2:
      return diff(series);
    case 3:
      return diff(diff(series));
    case 4:
      return series.array().log();
    case 5:
      return diff(series.array().log());
    case 6:
      return diff(diff(series.array().log()));
    case 7: {
      Eigen::VectorXd growth(series.size() - 1);
      for (Eigen::Index t = 1; t < series.size(); ++t)
        growth(t - 1) = series(t) / series(t - 1) - 1.0;
      return diff(growth);
    }
    default:
      throw InputError("unknown transform code " + std::to_string(code));
  }
}

FredMdResult load_fred_md(const std::filesystem::path& path) {
  CsvData data = read_csv_file(path);
  if (data.rows.size() < 4)
    throw InputError("FRED-MD file needs a header, a transform row and data: " + path.string());

  const auto& header = data.rows[0];
  const auto& code_row = data.rows[1];
  if (header.size() < 2) throw InputError("FRED-MD file has no series columns");
  if (code_row.size() != header.size())
    throw InputError("transform row width does not match header");

  const std::size_t n_series = header.size() - 1;
  const std::size_t n_obs = data.rows.size() - 2;

  std::vector<int> codes(n_series);
  for (std::size_t j = 0; j < n_series; ++j) {
    double v;
    if (!parse_double(code_row[j + 1], &v) || v != std::floor(v))
      throw InputError("unparseable transform code for series '" + header[j + 1] + "': '" +
                       code_row[j + 1] + "'");
    codes[j] = static_cast<int>(v);
    (void)transform_order(codes[j]);  // validates the code range
  }

  std::vector<std::string> dates(n_obs);
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(n_obs), static_cast<Eigen::Index>(n_series));
  std::vector<std::vector<bool>> missing(n_series, std::vector<bool>(n_obs, false));
  for (std::size_t i = 0; i < n_obs; ++i) {
    const auto& cells = data.rows[i + 2];
    if (cells.size() != header.size())
      throw InputError("row " + std::to_string(i + 3) + " has " + std::to_string(cells.size()) +
                       " cells, expected " + std::to_string(header.size()));
    dates[i] = cells[0];
    for (std::size_t j = 0; j < n_series; ++j) {
      double v = 0;
      if (is_missing_cell(cells[j + 1])) {
        missing[j][i] = true;
      } else if (!parse_double(cells[j + 1], &v)) {
        throw InputError("unparseable cell at row " + std::to_string(i + 3) + ", series '" +
                         header[j + 1] + "': '" + cells[j + 1] + "'");
      }
      raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }

  int max_order = 0;
  for (int c : codes) max_order = std::max(max_order, transform_order(c));
  const std::size_t t_out = n_obs - static_cast<std::size_t>(max_order);
  if (t_out < 2) throw InputError("too few observations after transform alignment");

  FredMdResult result;
  std::vector<Eigen::VectorXd> kept_series;
  for (std::size_t j = 0; j < n_series; ++j) {
    const std::string& name = header[j + 1];
    bool has_missing = false;
    for (bool m : missing[j]) has_missing |= m;
    if (has_missing) {
      result.report.push_back("dropped series '" + name + "': missing values");
      continue;
    }
    Eigen::VectorXd transformed;
    try {
      transformed = apply_transform_code(raw.col(static_cast<Eigen::Index>(j)), codes[j]);
    } catch (const InputError& e) {
      throw InputError(std::string(e.what()) + " (series '" + name + "')");
    }
    if (!transformed.allFinite()) {
      result.report.push_back("dropped series '" + name +
                              "': non-finite values after transform code " +
                              std::to_string(codes[j]));
      continue;
    }
    // Uniform alignment: every series loses max_order leading rows in total.
    Eigen::VectorXd aligned =
        transformed.tail(static_cast<Eigen::Index>(t_out));
    const double mean = aligned.mean();
    const double sd =
        std::sqrt((aligned.array() - mean).square().sum() / (static_cast<double>(t_out) - 1.0));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      result.report.push_back("dropped series '" + name + "': constant after transform code " +
                              std::to_string(codes[j]));
      continue;
    }
    kept_series.push_back((aligned.array() - mean) / sd);
    result.panel.unit_ids.push_back(name);
    result.transform_codes.push_back(codes[j]);
  }
  if (kept_series.empty()) throw InputError("no usable series in " + path.string());

  result.panel.values.resize(static_cast<Eigen::Index>(kept_series.size()),
                             static_cast<Eigen::Index>(t_out));
  for (std::size_t j = 0; j < kept_series.size(); ++j)
    result.panel.values.row(static_cast<Eigen::Index>(j)) = kept_series[j].transpose();
  result.panel.time_ids.assign(dates.end() - static_cast<std::ptrdiff_t>(t_out), dates.end());
  result.panel.validate();
  return result;
}

}  // namespace proxfact
