// proxfact: sparse proximate-factor estimation, EVT-based guarantees and
// Monte Carlo benchmarks for large panel data.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "proxfact/csv.hpp"
#include "proxfact/errors.hpp"
#include "proxfact/evt.hpp"
#include "proxfact/factor_model.hpp"
#include "proxfact/fredmd.hpp"
#include "proxfact/manifest.hpp"
#include "proxfact/metrics.hpp"
#include "proxfact/panel.hpp"
#include "proxfact/proximate.hpp"
#include "proxfact/simulate.hpp"
#include "proxfact/spca.hpp"

using namespace proxfact;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

std::string default_out_dir() {
  const char* env = std::getenv("PROXFACT_OUT");
  return env && *env ? env : ".";
}

// Plain-text key = value configuration; '#' starts a comment.
using KvConfig = std::map<std::string, std::string>;

KvConfig parse_kv_text(const std::string& text) {
  KvConfig kv;
  std::stringstream ss(text);
  std::string line;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("config line " + std::to_string(lineno) + " is not key = value: " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

KvConfig load_kv_file(const std::string& path) { return parse_kv_text(read_text_file(path)); }

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    double v;
    if (!parse_double(cell, &v)) throw InputError("bad numeric list entry: '" + cell + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty numeric list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_double_list(text)) out.push_back(static_cast<int>(v));
  return out;
}

double kv_double(const KvConfig& kv, const std::string& key, double fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  double v;
  if (!parse_double(it->second, &v)) throw InputError("bad numeric value for " + key);
  return v;
}

int kv_int(const KvConfig& kv, const std::string& key, int fallback) {
  return static_cast<int>(kv_double(kv, key, fallback));
}

std::string kv_string(const KvConfig& kv, const std::string& key, const std::string& fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

std::string join_args(int argc, char** argv) {
  std::string joined;
  for (int i = 0; i < argc; ++i) {
    if (i) joined += ' ';
    joined += argv[i];
  }
  return joined;
}

Orientation parse_orientation(const std::string& name) {
  if (name == "rows" || name == "units-in-rows") return Orientation::units_in_rows;
  if (name == "cols" || name == "columns" || name == "units-in-columns")
    return Orientation::units_in_columns;
  throw InputError("unknown orientation: " + name);
}

void attach_groups(Panel& panel, const std::string& groups_path) {
  CsvData data = read_csv_file(groups_path);
  std::map<std::string, std::string> groups;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const auto& cells = data.rows[i];
    if (cells.size() < 2) throw InputError("groups file needs unit,group rows");
    if (i == 0 && cells[0] == "unit") continue;
    groups[cells[0]] = cells[1];
  }
  panel.group_of_unit = std::move(groups);
}

Table factor_table(const Eigen::MatrixXd& m, const std::vector<std::string>& labels,
                   const std::string& label_column, const std::string& prefix) {
  std::vector<std::string> cols;
  for (int j = 0; j < m.cols(); ++j) cols.push_back(prefix + std::to_string(j + 1));
  Table t(label_column, cols);
  for (int i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (int j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    t.add_row(labels[static_cast<std::size_t>(i)], row);
  }
  return t;
}

void emit(RunManifest& manifest, const std::filesystem::path& dir, const std::string& name,
          const std::string& content) {
  write_text_file(dir / name, content);
  manifest.record_output(name, content);
}

struct LoadedPanel {
  Panel panel;
  StandardizeParams params;
  std::vector<std::string> report;
};

LoadedPanel load_input_panel(const std::string& input, const std::string& orientation,
                             const std::string& standardize_mode) {
  LoadedPanel out;
  PanelLoadResult loaded = load_csv(input, parse_orientation(orientation));
  out.report = loaded.report;
  StandardizeResult st = standardize(loaded.panel, parse_standardize_mode(standardize_mode));
  out.panel = std::move(st.panel);
  out.params = std::move(st.params);
  return out;
}

// ---------------------------------------------------------------- fit ----

struct FitArgs {
  std::string input;
  int k = 2;
  std::string standardize_mode = "zscore";
  std::string orientation = "rows";
  std::string out = default_out_dir();
  std::string config;
};

int cmd_fit(const FitArgs& args_in, const std::string& command_line) {
  FitArgs args = args_in;
  if (!args.config.empty()) {
    KvConfig kv = load_kv_file(args.config);
    args.input = kv_string(kv, "input", args.input);
    args.k = kv_int(kv, "k", args.k);
    args.standardize_mode = kv_string(kv, "standardize", args.standardize_mode);
    args.orientation = kv_string(kv, "orientation", args.orientation);
  }

  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.started_utc = utc_timestamp();
  manifest.config_hash = fnv1a64("fit|" + args.input + "|" + std::to_string(args.k) + "|" +
                                 args.standardize_mode + "|" + args.orientation);

  LoadedPanel loaded = load_input_panel(args.input, args.orientation, args.standardize_mode);
  for (const auto& r : loaded.report) manifest.note(r);

  FactorFit fit = pca_fit(loaded.panel, args.k);
  for (const auto& w : fit.warnings) manifest.note(w);

  const std::filesystem::path dir(args.out);
  emit(manifest, dir, "factors.csv",
       factor_table(fit.factors, loaded.panel.time_ids, "time", "factor_").to_csv());
  emit(manifest, dir, "loadings.csv",
       factor_table(fit.loadings, loaded.panel.unit_ids, "unit", "factor_").to_csv());
  Table eigen_table("factor", {"eigenvalue"});
  for (int j = 0; j < fit.k(); ++j)
    eigen_table.add_row(std::to_string(j + 1), {fit.eigenvalues(j)});
  emit(manifest, dir, "eigenvalues.csv", eigen_table.to_csv());

  manifest.finished_utc = utc_timestamp();
  manifest.write(dir);
  return kExitOk;
}

// ---------------------------------------------------------- proximate ----

struct ProximateArgs {
  std::string input;
  int k = 2;
  int m = 0;  // 0: use target_rho
  double target_rho = 0.0;
  std::string rotate = "none";
  double c = 0.0;
  bool practical = false;
  std::string standardize_mode = "zscore";
  std::string orientation = "rows";
  std::string groups;
  std::string out = default_out_dir();
  std::string config;
};

int cmd_proximate(const ProximateArgs& args_in, const std::string& command_line) {
  ProximateArgs args = args_in;
  if (!args.config.empty()) {
    KvConfig kv = load_kv_file(args.config);
    args.input = kv_string(kv, "input", args.input);
    args.k = kv_int(kv, "k", args.k);
    args.m = kv_int(kv, "m", args.m);
    args.target_rho = kv_double(kv, "target_rho", args.target_rho);
    args.rotate = kv_string(kv, "rotate", args.rotate);
    args.c = kv_double(kv, "c", args.c);
    args.standardize_mode = kv_string(kv, "standardize", args.standardize_mode);
    args.orientation = kv_string(kv, "orientation", args.orientation);
  }
  if (args.m <= 0 && args.target_rho <= 0.0)
    throw InputError("proximate needs either --m or --target-rho");

  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.started_utc = utc_timestamp();
  manifest.config_hash =
      fnv1a64("proximate|" + args.input + "|" + std::to_string(args.k) + "|" +
              std::to_string(args.m) + "|" + format_double(args.target_rho) + "|" + args.rotate +
              "|" + format_double(args.c) + "|" + (args.practical ? "practical" : "theory") +
              "|" + args.standardize_mode + "|" + args.orientation);

  LoadedPanel loaded = load_input_panel(args.input, args.orientation, args.standardize_mode);
  if (!args.groups.empty()) attach_groups(loaded.panel, args.groups);
  for (const auto& r : loaded.report) manifest.note(r);

  int m = args.m;
  if (m <= 0) {
    m = choose_m_data_driven(loaded.panel, args.k, args.target_rho);
    manifest.note("chosen_m = " + std::to_string(m) + " for target average correlation " +
                  format_double(args.target_rho));
  }

  FactorFit fit = pca_fit(loaded.panel, args.k);
  for (const auto& w : fit.warnings) manifest.note(w);

  SparseWeights weights;
  if (args.rotate == "none") {
    weights = hard_threshold_weights(fit.loadings, m);
  } else if (args.rotate == "varimax") {
    RotationSpec spec;
    spec.variant = RotationVariant::varimax;
    spec.c = args.c;
    weights = rotate_threshold_weights(fit, spec, m, true, args.practical);
  } else {
    throw InputError("unknown rotation variant: " + args.rotate);
  }

  const Eigen::MatrixXd prox = proximate_factors(loaded.panel, weights);
  const Eigen::MatrixXd prox_loads = proximate_loadings(loaded.panel, prox);

  const GenCorrResult gc = generalized_correlation(fit.factors, prox);
  const double ve_pca = variance_explained(loaded.panel, fit.factors);
  const double ve_prox = variance_explained(loaded.panel, prox);

  const std::filesystem::path dir(args.out);
  Table weight_table("unit", {"factor", "weight"});
  for (int j = 0; j < weights.weights.cols(); ++j)
    for (int i = 0; i < weights.weights.rows(); ++i)
      if (weights.mask(i, j))
        weight_table.add_row(loaded.panel.unit_ids[static_cast<std::size_t>(i)],
                             {static_cast<double>(j + 1), weights.weights(i, j)});
  emit(manifest, dir, "weights.csv", weight_table.to_csv());
  emit(manifest, dir, "proximate_factors.csv",
       factor_table(prox, loaded.panel.time_ids, "time", "factor_").to_csv());
  emit(manifest, dir, "proximate_loadings.csv",
       factor_table(prox_loads, loaded.panel.unit_ids, "unit", "factor_").to_csv());

  Table metrics_table("metric", {"value"});
  metrics_table.add_row("m", {static_cast<double>(m)});
  metrics_table.add_row("gencorr_total", {gc.total});
  metrics_table.add_row("gencorr_over_k", {gc.total / args.k});
  for (int j = 0; j < gc.individual.size(); ++j)
    metrics_table.add_row("gencorr_factor_" + std::to_string(j + 1), {gc.individual(j)});
  const Eigen::VectorXd r2 = per_factor_r2(fit.factors, prox);
  for (int j = 0; j < r2.size(); ++j)
    metrics_table.add_row("r2_factor_" + std::to_string(j + 1), {r2(j)});
  metrics_table.add_row("variance_explained_pca", {ve_pca});
  metrics_table.add_row("variance_explained_proximate", {ve_prox});
  emit(manifest, dir, "metrics.csv", metrics_table.to_csv());

  if (loaded.panel.group_of_unit)
    emit(manifest, dir, "composition.csv",
         composition_report(loaded.panel, weights).to_csv());

  manifest.note("m = " + std::to_string(m));
  manifest.finished_utc = utc_timestamp();
  manifest.write(dir);
  return kExitOk;
}

// -------------------------------------------------------------- bounds ----

struct BoundsArgs {
  std::string params;
  std::string out = default_out_dir();
};

GevSpec spec_from_kv(const KvConfig& kv, const std::string& suffix) {
  GevSpec spec = gev_spec_for_family(
      parse_tail_family(kv_string(kv, "family" + suffix,
                                  kv_string(kv, "family", "folded_normal"))));
  spec.mu = kv_double(kv, "mu" + suffix, kv_double(kv, "mu", spec.mu));
  spec.sigma = kv_double(kv, "sigma" + suffix, kv_double(kv, "sigma", spec.sigma));
  spec.xi = kv_double(kv, "xi" + suffix, kv_double(kv, "xi", spec.xi));
  spec.theta = kv_double(kv, "theta" + suffix, kv_double(kv, "theta", spec.theta));
  const std::string pi_text = kv_string(kv, "cluster_pi" + suffix, kv_string(kv, "cluster_pi", ""));
  if (!pi_text.empty()) {
    ClusterSizeDist cluster;
    cluster.pi = parse_double_list(pi_text);
    spec.cluster = cluster;
  }
  return spec;
}

int cmd_bounds(const BoundsArgs& args, const std::string& command_line) {
  if (args.params.empty()) throw InputError("bounds needs --params FILE");
  KvConfig kv = load_kv_file(args.params);
  const std::string variant = kv_string(kv, "variant", "one_factor");

  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.started_utc = utc_timestamp();
  manifest.config_hash = fnv1a64(read_text_file(args.params));

  std::vector<int> m_grid;
  if (kv.count("m_grid"))
    m_grid = parse_int_list(kv.at("m_grid"));
  else
    m_grid = {kv_int(kv, "m", 4)};

  const int n = kv_int(kv, "N", 100);
  const double sigma_e = kv_double(kv, "sigma_e", 1.0);
  const double h = kv_double(kv, "h", 0.0);
  const std::filesystem::path dir(args.out);

  Table table({"m", "tau", "rho0", "bound"});
  if (variant == "one_factor") {
    const GevSpec spec = spec_from_kv(kv, "");
    const double sigma_f = kv_double(kv, "sigma_f", 1.0);
    if (kv.count("tau_grid")) {
      for (int m : m_grid)
        for (const BoundResult& r : one_factor_bound_curve(
                 m, n, spec, sigma_f, sigma_e, h, parse_double_list(kv.at("tau_grid"))))
          table.add_row({static_cast<double>(m), r.params.tau, r.rho0, r.prob_lower_bound});
    } else {
      const double rho0 = kv_double(kv, "rho0", 0.95);
      for (int m : m_grid) {
        const double tau =
            solve_tau_for_rho0(rho0, m, n, 1, {spec}, sigma_e, h, {sigma_f * sigma_f});
        const double bound = 1.0 - g1m(spec, tau, m);
        table.add_row({static_cast<double>(m), tau, rho0, std::max(0.0, bound)});
      }
    }
  } else if (variant == "multi_factor") {
    const int k = kv_int(kv, "K", 2);
    std::vector<double> signals =
        kv.count("signals") ? parse_double_list(kv.at("signals"))
                            : std::vector<double>(static_cast<std::size_t>(k), 1.0);
    std::vector<GevSpec> specs;
    for (int j = 1; j <= k; ++j) specs.push_back(spec_from_kv(kv, "_" + std::to_string(j)));
    const double gamma = kv_double(kv, "gamma_underbar", 1.0);
    const double correction = kv_double(kv, "correction_prob", 0.0);
    const double rho0 = kv_double(kv, "rho0", 0.95 * k);
    for (int m : m_grid) {
      const double tau = solve_tau_for_rho0(rho0, m, n, k, specs, sigma_e, h, signals, gamma);
      BoundResult r = multi_factor_bound(m, n, k, specs, signals, sigma_e, h, gamma,
                                         correction, tau);
      table.add_row({static_cast<double>(m), tau, r.rho0, r.prob_lower_bound});
    }
  } else if (variant == "rotate_threshold") {
    const int k = kv_int(kv, "K", 2);
    const double c = kv_double(kv, "c", 0.1);
    const double rho0 = kv_double(kv, "rho0", 0.9 * k);
    const std::string samples_path = kv_string(kv, "samples_csv", "");
    if (samples_path.empty())
      throw InputError("rotate_threshold bounds need samples_csv = FILE with one column "
                       "of order-statistic samples per factor");
    Table samples = Table::read_csv(samples_path);
    std::vector<std::vector<double>> cols;
    for (const auto& name : samples.columns()) cols.push_back(samples.column(name));
    if (static_cast<int>(cols.size()) != k)
      throw InputError("samples_csv must have exactly K columns");
    Table rt({"m", "c", "gamma", "rho0", "bound"});
    for (int m : m_grid) {
      const double bound = rotate_threshold_bound(m, k, sigma_e, h, c, cols, rho0);
      rt.add_row({static_cast<double>(m), c, gamma_of_c(c, k), rho0, bound});
    }
    emit(manifest, dir, "bounds.csv", rt.to_csv());
    manifest.finished_utc = utc_timestamp();
    manifest.write(dir);
    return kExitOk;
  } else {
    throw InputError("unknown bounds variant: " + variant);
  }

  emit(manifest, dir, "bounds.csv", table.to_csv());
  manifest.finished_utc = utc_timestamp();
  manifest.write(dir);
  return kExitOk;
}

// ------------------------------------------------------------ simulate ----

struct SimulateArgs {
  std::string experiment;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::string config;
  std::string out = default_out_dir();
};

FigureOverrides overrides_from_kv(const KvConfig& kv) {
  FigureOverrides ov;
  if (kv.count("reps")) ov.reps = kv_int(kv, "reps", 0);
  if (kv.count("seed")) ov.seed = static_cast<std::uint64_t>(kv_double(kv, "seed", 0));
  if (kv.count("m_grid")) ov.m_grid = parse_int_list(kv.at("m_grid"));
  if (kv.count("n_grid")) ov.n_grid = parse_int_list(kv.at("n_grid"));
  if (kv.count("t_grid")) ov.t_grid = parse_int_list(kv.at("t_grid"));
  if (kv.count("sigma_f")) ov.sigma_f = parse_double_list(kv.at("sigma_f"));
  if (kv.count("rho0")) ov.rho0 = kv_double(kv, "rho0", 0.95);
  return ov;
}

int cmd_simulate(const SimulateArgs& args, const std::string& command_line) {
  KvConfig kv;
  for (const auto& s : args.sets) {
    KvConfig one = parse_kv_text(s);
    for (auto& [k, v] : one) kv[k] = v;
  }
  if (!args.config.empty())
    for (auto& [k, v] : load_kv_file(args.config)) kv[k] = v;  // config overrides flags

  FigureOverrides ov = overrides_from_kv(kv);
  if (!ov.reps && args.reps) ov.reps = *args.reps;
  if (!ov.seed && args.seed) ov.seed = *args.seed;

  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.started_utc = utc_timestamp();
  std::string cfg_digest = args.experiment;
  for (const auto& [k, v] : kv) cfg_digest += "|" + k + "=" + v;
  if (ov.reps) cfg_digest += "|reps=" + std::to_string(*ov.reps);
  if (ov.seed) cfg_digest += "|seed=" + std::to_string(*ov.seed);
  manifest.config_hash = fnv1a64(cfg_digest);
  manifest.seed = ov.seed ? *ov.seed : SimConfig{}.seed;

  const FigureId figure = parse_figure_id(args.experiment);
  Table table = run_figure_experiment(figure, ov);

  const std::filesystem::path dir(args.out);
  emit(manifest, dir, args.experiment + ".csv", table.to_csv());
  manifest.finished_utc = utc_timestamp();
  manifest.write(dir);
  return kExitOk;
}

// ------------------------------------------------------------- compare ----

struct CompareArgs {
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::string config;
  std::string out = default_out_dir();
};

int cmd_compare(const CompareArgs& args, const std::string& command_line) {
  KvConfig kv;
  for (const auto& s : args.sets) {
    KvConfig one = parse_kv_text(s);
    for (auto& [k, v] : one) kv[k] = v;
  }
  if (!args.config.empty())
    for (auto& [k, v] : load_kv_file(args.config)) kv[k] = v;

  ComparisonConfig cfg;
  cfg.n = kv_int(kv, "N", cfg.n);
  cfg.t = kv_int(kv, "T", cfg.t);
  cfg.k = kv_int(kv, "K", cfg.k);
  if (kv.count("sigma_f")) cfg.sigma_f = parse_double_list(kv.at("sigma_f"));
  if (kv.count("alpha_multipliers"))
    cfg.alpha_multipliers = parse_double_list(kv.at("alpha_multipliers"));
  cfg.errors.toeplitz_base = kv_double(kv, "toeplitz_base", cfg.errors.toeplitz_base);
  cfg.errors.heteroskedastic = kv_int(kv, "heteroskedastic", 1) != 0;
  cfg.train_fraction = kv_double(kv, "train_fraction", cfg.train_fraction);
  cfg.reps = kv_int(kv, "reps", args.reps ? *args.reps : cfg.reps);
  cfg.seed = static_cast<std::uint64_t>(
      kv_double(kv, "seed", static_cast<double>(args.seed ? *args.seed : cfg.seed)));

  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.started_utc = utc_timestamp();
  std::string digest = "compare";
  for (const auto& [k, v] : kv) digest += "|" + k + "=" + v;
  digest += "|reps=" + std::to_string(cfg.reps) + "|seed=" + std::to_string(cfg.seed);
  manifest.config_hash = fnv1a64(digest);
  manifest.seed = cfg.seed;

  Table table = run_comparison_experiment(cfg);
  const std::filesystem::path dir(args.out);
  emit(manifest, dir, "comparison.csv", table.to_csv());
  manifest.finished_utc = utc_timestamp();
  manifest.write(dir);
  return kExitOk;
}

// -------------------------------------------------------------- fredmd ----

struct FredMdArgs {
  std::string input;
  int k = 8;
  std::string m_grid = "10,15,20,25";
  std::string out = default_out_dir();
};

int cmd_fredmd(const FredMdArgs& args, const std::string& command_line) {
  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.started_utc = utc_timestamp();
  manifest.config_hash =
      fnv1a64("fredmd|" + args.input + "|" + std::to_string(args.k) + "|" + args.m_grid);

  FredMdResult data = load_fred_md(args.input);
  for (const auto& r : data.report) manifest.note(r);
  manifest.note("kept_series = " + std::to_string(data.panel.n_units()));
  manifest.note("periods = " + std::to_string(data.panel.n_periods()));

  FactorFit fit = pca_fit(data.panel, args.k);
  for (const auto& w : fit.warnings) manifest.note(w);

  std::vector<std::string> cols;
  for (int j = 1; j <= args.k; ++j) cols.push_back("r2_factor_" + std::to_string(j));
  cols.push_back("gencorr_over_k");
  cols.push_back("variance_explained_pca");
  cols.push_back("variance_explained_proximate");
  Table table("m", cols);
  for (int m : parse_int_list(args.m_grid)) {
    const SparseWeights w = hard_threshold_weights(fit.loadings, m);
    const Eigen::MatrixXd prox = proximate_factors(data.panel, w);
    const Eigen::VectorXd r2 = per_factor_r2(fit.factors, prox);
    std::vector<double> row;
    for (int j = 0; j < args.k; ++j) row.push_back(r2(j));
    row.push_back(generalized_correlation(fit.factors, prox).total / args.k);
    row.push_back(variance_explained(data.panel, fit.factors));
    row.push_back(variance_explained(data.panel, prox));
    table.add_row(std::to_string(m), row);
  }

  const std::filesystem::path dir(args.out);
  emit(manifest, dir, "fredmd_r2.csv", table.to_csv());
  write_panel_csv(data.panel, dir / "fredmd_panel.csv");
  manifest.record_output("fredmd_panel.csv", read_text_file(dir / "fredmd_panel.csv"));
  manifest.finished_utc = utc_timestamp();
  manifest.write(dir);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse proximate factors for large panels: estimation, "
               "probabilistic guarantees and Monte Carlo benchmarks"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "PCA factor estimation");
  fit_cmd->add_option("--input", fit_args.input, "panel CSV")->required();
  fit_cmd->add_option("--k", fit_args.k, "number of factors");
  fit_cmd->add_option("--standardize", fit_args.standardize_mode, "none|demean|zscore");
  fit_cmd->add_option("--orientation", fit_args.orientation, "rows|cols");
  fit_cmd->add_option("--out", fit_args.out, "output directory");
  fit_cmd->add_option("--config", fit_args.config, "key=value config file (overrides flags)");

  ProximateArgs prox_args;
  auto* prox_cmd = app.add_subcommand("proximate", "sparse proximate factors");
  prox_cmd->add_option("--input", prox_args.input, "panel CSV")->required();
  prox_cmd->add_option("--k", prox_args.k, "number of factors");
  prox_cmd->add_option("--m", prox_args.m, "nonzeros per factor weight column");
  prox_cmd->add_option("--target-rho", prox_args.target_rho,
                       "target average generalized correlation (chooses m)");
  prox_cmd->add_option("--rotate", prox_args.rotate, "none|varimax");
  prox_cmd->add_option("--c", prox_args.c, "overlap bound for rotate-and-threshold");
  prox_cmd->add_flag("--practical", prox_args.practical,
                     "threshold first, then rotate the sparse weights");
  prox_cmd->add_option("--standardize", prox_args.standardize_mode, "none|demean|zscore");
  prox_cmd->add_option("--orientation", prox_args.orientation, "rows|cols");
  prox_cmd->add_option("--groups", prox_args.groups, "unit,group CSV for composition report");
  prox_cmd->add_option("--out", prox_args.out, "output directory");
  prox_cmd->add_option("--config", prox_args.config, "key=value config file (overrides flags)");

  BoundsArgs bounds_args;
  auto* bounds_cmd = app.add_subcommand("bounds", "EVT bound curves");
  bounds_cmd->add_option("--params", bounds_args.params, "key=value parameter file")->required();
  bounds_cmd->add_option("--out", bounds_args.out, "output directory");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "exceedance experiments");
  sim_cmd->add_option("--experiment", sim_args.experiment, "fig1|fig2a|fig2b|fig3|fig4")
      ->required();
  int sim_reps = -1;
  std::int64_t sim_seed = -1;
  sim_cmd->add_option("--reps", sim_reps, "Monte Carlo replicates");
  sim_cmd->add_option("--seed", sim_seed, "RNG seed");
  sim_cmd->add_option("--set", sim_args.sets, "key=value override (repeatable)");
  sim_cmd->add_option("--config", sim_args.config, "key=value config file (overrides flags)");
  sim_cmd->add_option("--out", sim_args.out, "output directory");

  CompareArgs cmp_args;
  auto* cmp_cmd = app.add_subcommand("compare", "PPCA vs sparse-PCA benchmark");
  int cmp_reps = -1;
  std::int64_t cmp_seed = -1;
  cmp_cmd->add_option("--reps", cmp_reps, "Monte Carlo replicates");
  cmp_cmd->add_option("--seed", cmp_seed, "RNG seed");
  cmp_cmd->add_option("--set", cmp_args.sets, "key=value override (repeatable)");
  cmp_cmd->add_option("--config", cmp_args.config, "key=value config file (overrides flags)");
  cmp_cmd->add_option("--out", cmp_args.out, "output directory");

  FredMdArgs fred_args;
  auto* fred_cmd = app.add_subcommand("fredmd", "FRED-MD ingestion and replication table");
  fred_cmd->add_option("--input", fred_args.input, "FRED-MD CSV")->required();
  fred_cmd->add_option("--k", fred_args.k, "number of factors");
  fred_cmd->add_option("--m-grid", fred_args.m_grid, "comma-separated m values");
  fred_cmd->add_option("--out", fred_args.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  const std::string command_line = join_args(argc, argv);
  try {
    if (*fit_cmd) return cmd_fit(fit_args, command_line);
    if (*prox_cmd) return cmd_proximate(prox_args, command_line);
    if (*bounds_cmd) return cmd_bounds(bounds_args, command_line);
    if (*sim_cmd) {
      if (sim_reps >= 0) sim_args.reps = sim_reps;
      if (sim_seed >= 0) sim_args.seed = static_cast<std::uint64_t>(sim_seed);
      return cmd_simulate(sim_args, command_line);
    }
    if (*cmp_cmd) {
      if (cmp_reps >= 0) cmp_args.reps = cmp_reps;
      if (cmp_seed >= 0) cmp_args.seed = static_cast<std::uint64_t>(cmp_seed);
      return cmd_compare(cmp_args, command_line);
    }
    if (*fred_cmd) return cmd_fredmd(fred_args, command_line);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInput;
}
