#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "proxfact/panel.hpp"

namespace proxfact {

// FRED-MD transform codes:
//   1 level, 2 first difference, 3 second difference, 4 log,
//   5 log first difference, 6 log second difference,
//   7 first difference of the growth rate x_t/x_{t-1} - 1.
int transform_order(int code);  // leading observations lost
Eigen::VectorXd apply_transform_code(const Eigen::VectorXd& series, int code);

struct FredMdResult {
  Panel panel;                       // aligned and per-series standardized
  std::vector<int> transform_codes;  // for the kept series
  std::vector<std::string> report;   // dropped series and other actions
};

// Expects dates in the first column, series in the remaining columns, and a
// row of transform codes directly under the header. Each series is
// transformed by its code, all series are trimmed to a common start (max
// differencing order), and then standardized to zero mean, unit variance.
FredMdResult load_fred_md(const std::filesystem::path& path);

}  // namespace proxfact
