#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "proxfact/factor_model.hpp"

namespace proxfact {

enum class TailFamily {
  gumbel,
  frechet,
  weibull,
  folded_normal,
  standard_normal,
  exponential,
  uniform,
  custom
};

TailFamily parse_tail_family(const std::string& name);

// Cluster-size distribution pi(i), i = 1..m-1, for dependent exceedances.
struct ClusterSizeDist {
  std::vector<double> pi;  // pi[i-1] = pi(i)
  void validate() const;   // nonnegative, partial sums <= 1 + 1e-12
};

// Extreme-value description of the tail of |loading|: GEV parameters
// (mu, sigma, xi), extremal index theta, and norming sequences (a_N, b_N).
struct GevSpec {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;
  double theta = 1.0;
  TailFamily family = TailFamily::custom;
  // Optional override; when absent the family's norming constants are used.
  std::function<std::pair<double, double>(int)> norming;
  std::optional<ClusterSizeDist> cluster;

  void validate() const;
  std::pair<double, double> norming_for(int n) const;
};

// Preset (mu, sigma, xi) and norming for the named family.
GevSpec gev_spec_for_family(TailFamily family);

// Location/scale absorbing the extremal index theta. The xi -> 0 limit is
// evaluated by series expansion below |xi| = 1e-6.
std::pair<double, double> gev_starred(const GevSpec& spec);

// u_N(tau) = a_N (mu* + sigma* (tau^-xi - 1)/xi) + b_N, decreasing in tau.
double u_quantile(const GevSpec& spec, int n, double tau);

std::pair<double, double> norming_constants(TailFamily family, int n);

// Limit law of the m-th largest of N draws: G_{1,m}(tau) = e^-tau sum_{l<m} tau^l/l!.
double g1m_independent(double tau, int m);
// Dependent version via l-fold convolutions of the cluster-size distribution.
double g1m_dependent(double tau, int m, const ClusterSizeDist& cluster);
// Dispatch on spec.cluster.
double g1m(const GevSpec& spec, double tau, int m);

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);
double folded_normal_cdf(double y);  // 2 Phi(y) - 1 for y >= 0

// Counting bound: 1 - sum_{j<m} C(N,j) (1-F(y_m))^j F(y_m)^(N-j) with
// y_m = sqrt((1+h)/m * sigma_e^2/sigma_f^2 * rho0/(1-rho0)). Log-space sums.
double prop1_lower_bound(double rho0, int m, int n, double sigma_f, double sigma_e, double h_m,
                         const std::function<double(double)>& cdf_abs_loading);

struct BoundParams {
  int m = 0;
  int n = 0;
  int k = 1;
  double h_m = 0.0;
  double sigma_e = 1.0;
  double tau = 0.0;
  double gamma_underbar = 1.0;
  double correction_prob = 0.0;
  std::vector<double> signals;  // s_j; for one factor, sigma_f^2
};

struct BoundResult {
  double rho0 = 0.0;
  double prob_lower_bound = 0.0;
  BoundParams params;
};

// rho0(tau) = m s u^2 / ((1+h) sigma_e^2 + m s u^2), s = sigma_f^2.
double one_factor_rho0(int m, int n, const GevSpec& spec, double sigma_f, double sigma_e,
                       double h_m, double tau);

std::vector<BoundResult> one_factor_bound_curve(int m, int n, const GevSpec& spec, double sigma_f,
                                                double sigma_e, double h_m,
                                                const std::vector<double>& taus);

// rho0 = K - (1+h) sigma_e^2/(m gamma^2) sum_j 1/(s_j u_j^2);
// probability = prod_j (1 - G_{j,m}(tau)) - correction, floored at zero.
BoundResult multi_factor_bound(int m, int n, int k, const std::vector<GevSpec>& specs,
                               const std::vector<double>& signals, double sigma_e, double h_m,
                               double gamma_underbar, double correction_prob, double tau);

// Bisection on the monotone map tau -> rho0 (rho0 increases in u, u decreases
// in tau). K = 1 uses the one-factor threshold formula.
double solve_tau_for_rho0(double rho0_target, int m, int n, int k,
                          const std::vector<GevSpec>& specs, double sigma_e, double h_m,
                          const std::vector<double>& signals, double gamma_underbar = 1.0);

// Admissible upper limit for the rotate-and-threshold overlap bound c.
double rotate_threshold_c_max(int k);
// gamma(c, K) = c (2 + c (K-2)) sqrt(K (K-1)); errors if c is out of range.
double gamma_of_c(double c, int k);

// Empirical probability, over Monte Carlo samples of the constrained order
// statistics, that sum_j 1/(v_j)^2 < m (1-gamma) (K-rho0) / ((1+h) sigma_e^2).
double rotate_threshold_bound(int m, int k, double sigma_e, double h_m, double c,
                              const std::vector<std::vector<double>>& order_stat_samples,
                              double rho0);

double min_singular_value(const Eigen::MatrixXd& m);

// Bootstrap estimate of P(sigma_min(B) < gamma) from resampled loadings.
double sigma_min_b_bootstrap(const FactorFit& fit, int m, double gamma_underbar, int reps,
                             std::uint64_t seed);

// Blocks estimator theta = (#blocks with an exceedance) / (#exceedances).
double extremal_index_blocks(const std::vector<double>& series, double threshold,
                             int block_length);

enum class HMethod { exact, greedy };

// Worst-case dependence statistic over m-unit subsets:
// h(m) = max sqrt(sum_{k != l} corr(j_k, j_l)^2). The accessor supplies
// tau_ij / sigma_e^2 in [-1, 1]. Exact enumeration up to 1e6 subsets; the
// greedy method is an explicitly requested heuristic.
double h_of_m(const std::function<double(int, int)>& corr, int n, int m,
              HMethod method = HMethod::exact);

}  // namespace proxfact
