#include "proxfact/simulate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <array>
#include <cmath>

#include "proxfact/errors.hpp"
#include "proxfact/evt.hpp"
#include "proxfact/factor_model.hpp"
#include "proxfact/metrics.hpp"
#include "proxfact/proximate.hpp"
#include "proxfact/rng.hpp"
#include "proxfact/spca.hpp"

namespace proxfact {

namespace {

std::string padded_id(const char* prefix, int index, int width) {
  std::string digits = std::to_string(index + 1);
  while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
  return prefix + digits;
}

Eigen::MatrixXd toeplitz_cholesky(int n, double base) {
  Eigen::MatrixXd corr(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) corr(i, j) = std::pow(base, std::abs(i - j));
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success)
    throw NumericalError("error covariance is not positive definite (toeplitz base " +
                         std::to_string(base) + ")");
  return llt.matrixL();
}

double binomial_se(double p, int n) {
  return n > 0 ? std::sqrt(std::max(p * (1.0 - p), 0.0) / n) : 0.0;
}

}  // namespace

ErrorModel ErrorModel::iid(double sigma_e) {
  ErrorModel m;
  m.sigma_e = sigma_e;
  return m;
}

ErrorModel ErrorModel::hetero(double lo, double hi) {
  ErrorModel m;
  m.heteroskedastic = true;
  m.hetero_lo = lo;
  m.hetero_hi = hi;
  return m;
}

ErrorModel ErrorModel::toeplitz(double base) {
  ErrorModel m;
  m.toeplitz_base = base;
  return m;
}

ErrorModel ErrorModel::hetero_toeplitz(double base, double lo, double hi) {
  ErrorModel m;
  m.toeplitz_base = base;
  m.heteroskedastic = true;
  m.hetero_lo = lo;
  m.hetero_hi = hi;
  return m;
}

void ErrorModel::validate() const {
  if (!(sigma_e > 0.0)) throw InputError("error model: sigma_e must be positive");
  if (!(toeplitz_base > -1.0 && toeplitz_base < 1.0))
    throw InputError("error model: toeplitz base must lie in (-1, 1)");
  if (heteroskedastic && !(0.0 < hetero_lo && hetero_lo < hetero_hi))
    throw InputError("error model: heteroskedastic bounds need 0 < lo < hi");
}

void SimConfig::validate() const {
  if (n < 1 || t < 2) throw InputError("simulation needs N >= 1, T >= 2");
  if (k < 1 || k > std::min(n, t)) throw InputError("simulation needs 1 <= K <= min(N, T)");
  if (static_cast<int>(sigma_f.size()) != k)
    throw InputError("simulation needs one sigma_f per factor");
  for (double s : sigma_f)
    if (!(s > 0.0)) throw InputError("factor standard deviations must be positive");
  if (m < 1 || m > n) throw InputError("simulation needs 1 <= m <= N");
  if (reps < 1) throw InputError("simulation needs reps >= 1");
  errors.validate();
}

Panel SimDraw::to_panel() const {
  Panel panel;
  panel.values = x;
  const int n = static_cast<int>(x.rows());
  const int t = static_cast<int>(x.cols());
  const int wn = static_cast<int>(std::to_string(n).size());
  const int wt = static_cast<int>(std::to_string(t).size());
  for (int i = 0; i < n; ++i) panel.unit_ids.push_back(padded_id("u", i, wn));
  for (int j = 0; j < t; ++j) panel.time_ids.push_back(padded_id("t", j, wt));
  return panel;
}

SimDraw gen_factor_panel(const SimConfig& config, std::int64_t replicate) {
  config.validate();
  const auto rep = static_cast<std::uint64_t>(replicate);

  SimDraw draw;
  Rng f_rng(config.seed, rep, rng_tag::factors);
  draw.factors = f_rng.normal_matrix(config.t, config.k);
  for (int j = 0; j < config.k; ++j)
    draw.factors.col(j) *= config.sigma_f[static_cast<std::size_t>(j)];

  Rng l_rng(config.seed, rep, rng_tag::loadings);
  if (config.loading_quantile) {
    draw.loadings.resize(config.n, config.k);
    for (int j = 0; j < config.k; ++j)
      for (int i = 0; i < config.n; ++i)
        draw.loadings(i, j) = config.loading_quantile(l_rng.uniform());
  } else {
    draw.loadings = l_rng.normal_matrix(config.n, config.k);
  }

  Rng e_rng(config.seed, rep, rng_tag::errors);
  Eigen::MatrixXd e = e_rng.normal_matrix(config.n, config.t);
  if (config.errors.toeplitz_base != 0.0)
    e = toeplitz_cholesky(config.n, config.errors.toeplitz_base) * e;
  if (config.errors.heteroskedastic) {
    Rng h_rng(config.seed, rep, rng_tag::hetero_scales);
    for (int i = 0; i < config.n; ++i)
      e.row(i) *= h_rng.uniform(config.errors.hetero_lo, config.errors.hetero_hi);
  }
  if (config.errors.sigma_e != 1.0) e *= config.errors.sigma_e;

  draw.x = draw.loadings * draw.factors.transpose() + e;
  return draw;
}

namespace {

// Shared panel/PCA across an m-grid: one exceedance tally per m.
struct GridTally {
  std::vector<int> success;
  std::vector<int> failed;
};

GridTally exceedance_grid(const SimConfig& config, const std::vector<int>& m_grid) {
  GridTally tally;
  tally.success.assign(m_grid.size(), 0);
  tally.failed.assign(m_grid.size(), 0);
  for (int rep = 0; rep < config.reps; ++rep) {
    SimDraw draw = gen_factor_panel(config, rep);
    bool fit_ok = true;
    FactorFit fit;
    try {
      fit = pca_fit(draw.x, config.k);
    } catch (const std::exception&) {
      fit_ok = false;
    }
    for (std::size_t mi = 0; mi < m_grid.size(); ++mi) {
      if (!fit_ok) {
        ++tally.failed[mi];
        continue;
      }
      try {
        const SparseWeights w = hard_threshold_weights(fit.loadings, m_grid[mi]);
        const Eigen::MatrixXd prox = proximate_factors(draw.x, w);
        const double rho = generalized_correlation(draw.factors, prox).total;
        if (rho > config.rho0) ++tally.success[mi];
      } catch (const std::exception&) {
        ++tally.failed[mi];
      }
    }
  }
  return tally;
}

}  // namespace

ExceedanceResult monte_carlo_exceedance(const SimConfig& config) {
  const GridTally tally = exceedance_grid(config, {config.m});
  ExceedanceResult result;
  result.n_failed = tally.failed[0];
  result.n_valid = config.reps - result.n_failed;
  result.n_success = tally.success[0];
  if (result.n_valid == 0)
    throw NumericalError("monte_carlo_exceedance: every replicate failed");
  result.empirical_prob = static_cast<double>(result.n_success) / result.n_valid;
  result.se = binomial_se(result.empirical_prob, result.n_valid);
  return result;
}

FigureId parse_figure_id(const std::string& name) {
  if (name == "fig1") return FigureId::fig1;
  if (name == "fig2a") return FigureId::fig2a;
  if (name == "fig2b") return FigureId::fig2b;
  if (name == "fig3") return FigureId::fig3;
  if (name == "fig4") return FigureId::fig4;
  throw InputError("unknown experiment: " + name +
                   " (expected fig1, fig2a, fig2b, fig3 or fig4)");
}

namespace {

struct FigureDesign {
  int k = 1;
  std::vector<double> sigma_f;
  double rho0 = 0.95;
  std::vector<int> m_grid;
  std::vector<int> n_grid;
  std::vector<int> t_grid;
  int reps = 1000;
};

FigureDesign figure_design(FigureId figure) {
  FigureDesign d;
  switch (figure) {
    case FigureId::fig1:
      d.k = 1;
      d.sigma_f = {1.0};
      d.rho0 = 0.95;
      d.m_grid = {2, 3, 4, 5, 6, 7, 8, 9, 10};
      d.n_grid = {100};
      d.t_grid = {50, 100, 200};
      break;
    case FigureId::fig2a:
      d.k = 1;
      d.sigma_f = {1.0};
      d.rho0 = 0.95;
      d.m_grid = {4};
      d.n_grid = {50, 100, 200, 400};
      d.t_grid = {50, 200};
      break;
    case FigureId::fig3:
      d.k = 2;
      d.sigma_f = {1.2, 1.0};
      d.rho0 = 1.9;
      d.m_grid = {2, 3, 4, 5, 6, 7, 8, 9, 10};
      d.n_grid = {100};
      d.t_grid = {50, 100, 200};
      break;
    case FigureId::fig2b:
    case FigureId::fig4:
      d.k = 2;
      d.sigma_f = {1.2, 1.0};
      d.rho0 = 1.9;
      d.m_grid = {4};
      d.n_grid = {50, 100, 200, 400};
      d.t_grid = {50, 200};
      break;
  }
  return d;
}

// Theoretical bound at (m, N) for the i.i.d.-normal-loading designs: folded
// normal tails, no error dependence, gamma = 1 and no correction term.
std::pair<double, double> design_bound(const FigureDesign& d, int m, int n) {
  const GevSpec spec = gev_spec_for_family(TailFamily::folded_normal);
  std::vector<GevSpec> specs(static_cast<std::size_t>(d.k), spec);
  std::vector<double> signals;
  for (double s : d.sigma_f) signals.push_back(s * s);
  const double tau = solve_tau_for_rho0(d.rho0, m, n, d.k, specs, 1.0, 0.0, signals, 1.0);
  double bound;
  if (d.k == 1) {
    bound = std::min(std::max(1.0 - g1m_independent(tau, m), 0.0), 1.0);
  } else {
    bound = multi_factor_bound(m, n, d.k, specs, signals, 1.0, 0.0, 1.0, 0.0, tau)
                .prob_lower_bound;
  }
  return {tau, bound};
}

}  // namespace

Table run_figure_experiment(FigureId figure, const FigureOverrides& overrides) {
  FigureDesign d = figure_design(figure);
  if (overrides.reps) d.reps = *overrides.reps;
  if (overrides.m_grid) d.m_grid = *overrides.m_grid;
  if (overrides.n_grid) d.n_grid = *overrides.n_grid;
  if (overrides.t_grid) d.t_grid = *overrides.t_grid;
  if (overrides.sigma_f) {
    if (static_cast<int>(overrides.sigma_f->size()) != d.k)
      throw InputError("sigma_f override must supply one value per factor");
    d.sigma_f = *overrides.sigma_f;
  }
  if (overrides.rho0) d.rho0 = *overrides.rho0;
  if (d.reps < 1) throw InputError("figure experiment needs reps >= 1");

  SimConfig base;
  base.k = d.k;
  base.sigma_f = d.sigma_f;
  base.errors = ErrorModel::iid(1.0);
  base.rho0 = d.rho0;
  base.reps = d.reps;
  if (overrides.seed) base.seed = *overrides.seed;

  Table table({"m", "N", "T", "rho0", "tau", "bound", "empirical_prob", "se", "failures"});
  for (int n : d.n_grid) {
    // The bound does not depend on T; compute it once per (m, N).
    std::vector<std::pair<double, double>> bounds;
    bounds.reserve(d.m_grid.size());
    for (int m : d.m_grid) bounds.push_back(design_bound(d, m, n));
    for (int t : d.t_grid) {
      SimConfig cfg = base;
      cfg.n = n;
      cfg.t = t;
      cfg.m = d.m_grid.front();
      const GridTally tally = exceedance_grid(cfg, d.m_grid);
      for (std::size_t mi = 0; mi < d.m_grid.size(); ++mi) {
        const int valid = d.reps - tally.failed[mi];
        const double p = valid > 0 ? static_cast<double>(tally.success[mi]) / valid : 0.0;
        table.add_row({static_cast<double>(d.m_grid[mi]), static_cast<double>(n),
                       static_cast<double>(t), d.rho0, bounds[mi].first, bounds[mi].second, p,
                       binomial_se(p, valid), static_cast<double>(tally.failed[mi])});
      }
    }
  }
  return table;
}

void ComparisonConfig::validate() const {
  if (n < 2 || t < 4) throw InputError("comparison needs N >= 2, T >= 4");
  if (k < 1) throw InputError("comparison needs K >= 1");
  if (static_cast<int>(sigma_f.size()) != k)
    throw InputError("comparison needs one sigma_f per factor");
  if (alpha_multipliers.empty()) throw InputError("comparison needs an alpha grid");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InputError("train fraction must lie in (0, 1)");
  if (reps < 1) throw InputError("comparison needs reps >= 1");
  errors.validate();
}

namespace {

constexpr int kMethods = 4;  // pca, ppca, spca, spca_mod
constexpr int kMetrics = 6;  // gc_f_in, gc_f_out, gc_l_in, gc_l_out, rmse_in, rmse_out

const char* kMethodNames[kMethods] = {"pca", "ppca", "spca", "spca_mod"};
const char* kMetricNames[kMetrics] = {"gc_f_in",  "gc_f_out", "gc_l_in",
                                      "gc_l_out", "rmse_in",  "rmse_out"};

struct MethodOutput {
  Eigen::MatrixXd f_in, f_out;   // T_tr x K, T_te x K
  Eigen::MatrixXd l_in, l_out;   // N x K
};

}  // namespace

Table run_comparison_experiment(const ComparisonConfig& config) {
  config.validate();
  const std::size_t n_alpha = config.alpha_multipliers.size();

  SimConfig sim;
  sim.n = config.n;
  sim.t = config.t;
  sim.k = config.k;
  sim.sigma_f = config.sigma_f;
  sim.errors = config.errors;
  sim.reps = config.reps;
  sim.seed = config.seed;
  sim.m = 1;
  sim.rho0 = 0.5;

  std::vector<std::array<std::array<double, kMetrics>, kMethods>> sums(
      n_alpha, {{{0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}}});
  std::vector<double> alpha_sum(n_alpha, 0.0), nnz_sum(n_alpha, 0.0), m_sum(n_alpha, 0.0);
  std::vector<int> used(n_alpha, 0), failed(n_alpha, 0);

  const int t_train = static_cast<int>(std::floor(config.t * config.train_fraction));
  if (t_train <= config.k || config.t - t_train <= config.k)
    throw InputError("comparison split leaves too few periods per side");

  for (int rep = 0; rep < config.reps; ++rep) {
    const SimDraw draw = gen_factor_panel(sim, rep);
    const Eigen::MatrixXd x_tr = draw.x.leftCols(t_train);
    const Eigen::MatrixXd x_te = draw.x.rightCols(config.t - t_train);
    const Eigen::MatrixXd f_tr = draw.factors.topRows(t_train);
    const Eigen::MatrixXd f_te = draw.factors.bottomRows(config.t - t_train);

    FactorFit fit;
    try {
      fit = pca_fit(x_tr, config.k);
    } catch (const std::exception&) {
      for (std::size_t a = 0; a < n_alpha; ++a) ++failed[a];
      continue;
    }
    const Eigen::MatrixXd pca_f_te = x_te.transpose() * fit.loadings / config.n;

    for (std::size_t a = 0; a < n_alpha; ++a) {
      try {
        const double alpha = config.alpha_multipliers[a] * t_train * fit.eigenvalues(0);
        const SpcaFit spca = spca_fit_alpha(x_tr, fit, alpha);
        const int nnz = spca.nnz_total();
        const int m_matched = std::clamp(
            static_cast<int>(std::lround(static_cast<double>(nnz) / config.k)), 1, config.n);

        MethodOutput out[kMethods];
        // PCA
        out[0].f_in = fit.factors;
        out[0].f_out = pca_f_te;
        out[0].l_in = fit.loadings;
        out[0].l_out = proximate_loadings(x_te, pca_f_te);
        // PPCA
        const SparseWeights w = hard_threshold_weights(fit.loadings, m_matched);
        out[1].f_in = proximate_factors(x_tr, w);
        out[1].f_out = proximate_factors(x_te, w);
        out[1].l_in = proximate_loadings(x_tr, out[1].f_in);
        out[1].l_out = proximate_loadings(x_te, out[1].f_out);
        // SPCA: sparse loadings reused out of sample.
        out[2].f_in = spca.factors;
        out[2].f_out = spca_factors(x_te, spca.sparse_loadings);
        out[2].l_in = spca.sparse_loadings;
        out[2].l_out = spca.sparse_loadings;
        // Modified SPCA: same factors, second-stage loadings.
        out[3].f_in = out[2].f_in;
        out[3].f_out = out[2].f_out;
        out[3].l_in = spca_modified_loadings(x_tr, out[3].f_in);
        out[3].l_out = spca_modified_loadings(x_te, out[3].f_out);

        std::array<std::array<double, kMetrics>, kMethods> cell;
        for (int mth = 0; mth < kMethods; ++mth) {
          cell[mth][0] = generalized_correlation(f_tr, out[mth].f_in).total;
          cell[mth][1] = generalized_correlation(f_te, out[mth].f_out).total;
          cell[mth][2] = loading_generalized_correlation(draw.loadings, out[mth].l_in).total;
          cell[mth][3] = loading_generalized_correlation(draw.loadings, out[mth].l_out).total;
          cell[mth][4] = rmse_common_component(x_tr, out[mth].l_in * out[mth].f_in.transpose());
          cell[mth][5] = rmse_common_component(x_te, out[mth].l_out * out[mth].f_out.transpose());
        }
        for (int mth = 0; mth < kMethods; ++mth)
          for (int met = 0; met < kMetrics; ++met) sums[a][mth][met] += cell[mth][met];
        alpha_sum[a] += alpha;
        nnz_sum[a] += nnz;
        m_sum[a] += m_matched;
        ++used[a];
      } catch (const std::exception&) {
        ++failed[a];
      }
    }
  }

  std::vector<std::string> cols = {"alpha_multiplier", "alpha_mean", "nnz_mean", "m_mean"};
  for (const char* mth : kMethodNames)
    for (const char* met : kMetricNames) cols.push_back(std::string(mth) + "_" + met);
  cols.push_back("reps_used");
  cols.push_back("failures");

  Table table(cols);
  for (std::size_t a = 0; a < n_alpha; ++a) {
    const double denom = std::max(used[a], 1);
    std::vector<double> row = {config.alpha_multipliers[a], alpha_sum[a] / denom,
                               nnz_sum[a] / denom, m_sum[a] / denom};
    for (int mth = 0; mth < kMethods; ++mth)
      for (int met = 0; met < kMetrics; ++met) row.push_back(sums[a][mth][met] / denom);
    row.push_back(static_cast<double>(used[a]));
    row.push_back(static_cast<double>(failed[a]));
    table.add_row(std::move(row));
  }
  return table;
}

DeltaRhoResult run_delta_rho_experiment(int n, int t, const std::vector<double>& alpha_multipliers,
                                        int reps, std::uint64_t seed) {
  if (alpha_multipliers.empty()) throw InputError("delta-rho experiment needs an alpha grid");
  SimConfig sim;
  sim.n = n;
  sim.t = t;
  sim.k = 1;
  sim.sigma_f = {1.0};
  sim.errors = ErrorModel::iid(1.0);
  sim.reps = reps;
  sim.seed = seed;
  sim.m = 1;
  sim.rho0 = 0.5;
  sim.validate();

  const std::size_t n_alpha = alpha_multipliers.size();
  std::vector<long> cells(n_alpha, 0), nonneg(n_alpha, 0);
  std::vector<double> delta_sum(n_alpha, 0.0);
  long rep_avg_nonneg = 0, rep_avg_total = 0;
  int failures = 0;

  for (int rep = 0; rep < reps; ++rep) {
    const SimDraw draw = gen_factor_panel(sim, rep);
    FactorFit fit;
    try {
      fit = pca_fit(draw.x, 1);
    } catch (const std::exception&) {
      ++failures;
      continue;
    }
    double rep_delta_sum = 0.0;
    int rep_cells = 0;
    for (std::size_t a = 0; a < n_alpha; ++a) {
      try {
        const double alpha = alpha_multipliers[a] * t * fit.eigenvalues(0);
        const SpcaFit spca = spca_fit_alpha(draw.x, fit, alpha);
        const int m_matched = std::clamp(spca.nnz_total(), 1, n);
        const SparseWeights w = hard_threshold_weights(fit.loadings, m_matched);
        const double rho_ppca =
            generalized_correlation(draw.factors, proximate_factors(draw.x, w)).total;
        const double rho_spca = generalized_correlation(draw.factors, spca.factors).total;
        const double delta = rho_ppca - rho_spca;
        ++cells[a];
        if (delta >= -1e-10) ++nonneg[a];
        delta_sum[a] += delta;
        rep_delta_sum += delta;
        ++rep_cells;
      } catch (const std::exception&) {
        ++failures;
      }
    }
    if (rep_cells > 0) {
      ++rep_avg_total;
      if (rep_delta_sum / rep_cells >= 0.0) ++rep_avg_nonneg;
    }
  }

  DeltaRhoResult result;
  result.per_alpha = Table({"alpha_multiplier", "cells", "nonneg_cells", "mean_delta"});
  long total_cells = 0, total_nonneg = 0;
  for (std::size_t a = 0; a < n_alpha; ++a) {
    total_cells += cells[a];
    total_nonneg += nonneg[a];
    result.per_alpha.add_row({alpha_multipliers[a], static_cast<double>(cells[a]),
                              static_cast<double>(nonneg[a]),
                              cells[a] > 0 ? delta_sum[a] / cells[a] : 0.0});
  }
  result.cell_fraction =
      total_cells > 0 ? static_cast<double>(total_nonneg) / total_cells : 0.0;
  result.rep_avg_fraction =
      rep_avg_total > 0 ? static_cast<double>(rep_avg_nonneg) / rep_avg_total : 0.0;
  result.failures = failures;
  return result;
}

Table run_loading_consistency_experiment(const ComparisonConfig& base,
                                         const std::vector<std::pair<int, int>>& sizes, int m) {
  if (sizes.empty()) throw InputError("loading consistency sweep needs at least one size");
  Table table({"N", "T", "m", "mean_rho_over_k", "se", "failures"});
  for (const auto& [n, t] : sizes) {
    SimConfig sim;
    sim.n = n;
    sim.t = t;
    sim.k = base.k;
    sim.sigma_f = base.sigma_f;
    sim.errors = base.errors;
    sim.reps = base.reps;
    sim.seed = base.seed;
    sim.m = m;
    sim.rho0 = 0.5;
    sim.validate();

    double sum = 0.0, sumsq = 0.0;
    int valid = 0, failures = 0;
    for (int rep = 0; rep < base.reps; ++rep) {
      try {
        const SimDraw draw = gen_factor_panel(sim, rep);
        const FactorFit fit = pca_fit(draw.x, base.k);
        const SparseWeights w = hard_threshold_weights(fit.loadings, m);
        const Eigen::MatrixXd prox = proximate_factors(draw.x, w);
        const Eigen::MatrixXd lam = proximate_loadings(draw.x, prox);
        const double rho =
            loading_generalized_correlation(draw.loadings, lam).total / base.k;
        sum += rho;
        sumsq += rho * rho;
        ++valid;
      } catch (const std::exception&) {
        ++failures;
      }
    }
    const double mean = valid > 0 ? sum / valid : 0.0;
    const double var = valid > 1 ? (sumsq - valid * mean * mean) / (valid - 1) : 0.0;
    table.add_row({static_cast<double>(n), static_cast<double>(t), static_cast<double>(m), mean,
                   valid > 0 ? std::sqrt(std::max(var, 0.0) / valid) : 0.0,
                   static_cast<double>(failures)});
  }
  return table;
}

}  // namespace proxfact
