#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "proxfact/csv.hpp"
#include "proxfact/panel.hpp"

namespace proxfact {

// Idiosyncratic error design. Components compose: with both heteroskedastic
// scales and a Toeplitz correlation, e_t = sigma_e * D_sigma * L * z_t with
// L the Cholesky factor of the Toeplitz correlation matrix.
struct ErrorModel {
  double sigma_e = 1.0;
  double toeplitz_base = 0.0;  // 0 disables cross-section correlation
  bool heteroskedastic = false;
  double hetero_lo = 0.5;
  double hetero_hi = 1.5;

  static ErrorModel iid(double sigma_e = 1.0);
  static ErrorModel hetero(double lo = 0.5, double hi = 1.5);
  static ErrorModel toeplitz(double base);
  static ErrorModel hetero_toeplitz(double base, double lo = 0.5, double hi = 1.5);
  void validate() const;
};

struct SimConfig {
  int n = 100;
  int t = 200;
  int k = 1;
  std::vector<double> sigma_f = {1.0};  // factor stds, Sigma_F diagonal
  ErrorModel errors;
  // Loadings are N(0,1) i.i.d. by default; a quantile function overrides.
  std::function<double(double)> loading_quantile;
  int m = 4;
  double rho0 = 0.95;
  int reps = 1000;
  std::uint64_t seed = 20240915;

  void validate() const;
};

struct SimDraw {
  Eigen::MatrixXd x;         // N x T
  Eigen::MatrixXd factors;   // T x K
  Eigen::MatrixXd loadings;  // N x K
  Panel to_panel() const;
};

// Deterministic given (config.seed, replicate), independent of scheduling.
SimDraw gen_factor_panel(const SimConfig& config, std::int64_t replicate);

struct ExceedanceResult {
  double empirical_prob = 0.0;
  double se = 0.0;
  int n_success = 0;
  int n_valid = 0;
  int n_failed = 0;
};

// Fraction of replicates whose generalized correlation between the true and
// the proximate factors strictly exceeds rho0.
ExceedanceResult monte_carlo_exceedance(const SimConfig& config);

enum class FigureId { fig1, fig2a, fig2b, fig3, fig4 };
FigureId parse_figure_id(const std::string& name);

struct FigureOverrides {
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<int>> m_grid;
  std::optional<std::vector<int>> n_grid;
  std::optional<std::vector<int>> t_grid;
  std::optional<std::vector<double>> sigma_f;
  std::optional<double> rho0;
};

// Exceedance-vs-bound sweeps. Columns:
//   m, N, T, rho0, tau, bound, empirical_prob, se, failures
// fig1: one-factor m-sweep; fig2a: one-factor N-sweep; fig3: two-factor
// m-sweep; fig4 (alias fig2b): two-factor N-sweep.
Table run_figure_experiment(FigureId figure, const FigureOverrides& overrides = {});

struct ComparisonConfig {
  int n = 100;
  int t = 100;  // split in half chronologically for train/test
  int k = 5;
  std::vector<double> sigma_f = {1.4, 1.3, 1.2, 1.1, 1.0};
  ErrorModel errors = ErrorModel::hetero_toeplitz(0.5);
  // alpha = multiplier * T_train * s_hat_1 per replicate.
  std::vector<double> alpha_multipliers = {0.05, 0.1, 0.2, 0.4, 0.6, 0.9};
  double train_fraction = 0.5;
  int reps = 200;
  std::uint64_t seed = 20240915;

  void validate() const;
};

// PCA vs proximate (PPCA) vs sparse PCA (SPCA, and its modified second-stage
// variant) on simulated panels: generalized correlations of factors and
// loadings against the truth plus common-component RMSE, in and out of
// sample, averaged over replicates per alpha row.
Table run_comparison_experiment(const ComparisonConfig& config);

// One-factor design with matched nonzero counts: per-alpha exceedance stats
// of Delta rho = rho(PPCA) - rho(SPCA) >= 0.
struct DeltaRhoResult {
  Table per_alpha;           // alpha_multiplier, cells, nonneg_cells, mean_delta
  double cell_fraction = 0;  // share of (replicate, alpha) cells with Delta rho >= -1e-10
  double rep_avg_fraction = 0;  // share of replicates whose grid-average Delta rho >= 0
  int failures = 0;
};
DeltaRhoResult run_delta_rho_experiment(int n, int t, const std::vector<double>& alpha_multipliers,
                                        int reps, std::uint64_t seed);

// Proximate-loading consistency sweep: mean rho(Lambda_tilde, Lambda)/K at
// m = k over growing (N, T). Columns: N, T, m, mean_rho_over_k, se, failures.
Table run_loading_consistency_experiment(const ComparisonConfig& base,
                                         const std::vector<std::pair<int, int>>& sizes, int m);

}  // namespace proxfact
