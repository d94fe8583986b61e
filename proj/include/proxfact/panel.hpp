#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace proxfact {

// N x T observation panel. Rows are cross-section units, columns are time
// periods in chronological file order.
struct Panel {
  Eigen::MatrixXd values;             // N x T
  std::vector<std::string> unit_ids;  // size N, distinct
  std::vector<std::string> time_ids;  // size T, distinct
  // Optional unit -> group label map, used for composition reports.
  std::optional<std::map<std::string, std::string>> group_of_unit;

  int n_units() const { return static_cast<int>(values.rows()); }
  int n_periods() const { return static_cast<int>(values.cols()); }
  void validate() const;  // finite entries, distinct ids, N >= 1, T >= 2
};

enum class Orientation { units_in_rows, units_in_columns };
enum class MissingPolicy { drop_unit, error };

struct PanelLoadResult {
  Panel panel;
  std::vector<std::string> report;  // dropped units and other actions
};

PanelLoadResult load_csv(const std::filesystem::path& path, Orientation orientation,
                         MissingPolicy policy = MissingPolicy::drop_unit);

// Units in rows, header row of time ids, first column of unit ids.
// Values round-trip exactly through load_csv.
void write_panel_csv(const Panel& panel, const std::filesystem::path& path);

enum class StandardizeMode { none, demean, zscore };

struct StandardizeParams {
  StandardizeMode mode = StandardizeMode::none;
  Eigen::VectorXd means;  // per unit
  Eigen::VectorXd stds;   // per unit, sample std (T-1 divisor)
};

struct StandardizeResult {
  Panel panel;
  StandardizeParams params;
};

StandardizeResult standardize(const Panel& panel, StandardizeMode mode);

// Apply parameters estimated on one panel (training) to another (test).
Panel apply_standardization(const Panel& panel, const StandardizeParams& params);

// Chronological split; training side gets floor(T * fraction) periods.
std::pair<Panel, Panel> split_train_test(const Panel& panel, double fraction);

StandardizeMode parse_standardize_mode(const std::string& name);

}  // namespace proxfact
