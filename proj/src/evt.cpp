#include "proxfact/evt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "proxfact/errors.hpp"
#include "proxfact/rng.hpp"
#include "proxfact/sym_eigen.hpp"

namespace proxfact {

namespace {

constexpr double kXiLimit = 1e-6;  // below this, use the xi -> 0 series

double logsumexp(const std::vector<double>& logs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logs) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double v : logs) s += std::exp(v - mx);
  return mx + std::log(s);
}

double clamp01(double v) { return std::min(std::max(v, 0.0), 1.0); }

// (tau^-xi - 1)/xi with a series expansion at small |xi|.
double gev_w(double tau, double xi) {
  if (!(tau > 0.0)) throw InputError("gev quantile needs tau > 0");
  const double logt = std::log(tau);
  if (std::abs(xi) < kXiLimit)
    return -logt + xi * logt * logt / 2.0 - xi * xi * logt * logt * logt / 6.0;
  return std::expm1(-xi * logt) / xi;
}

}  // namespace

TailFamily parse_tail_family(const std::string& name) {
  if (name == "gumbel") return TailFamily::gumbel;
  if (name == "frechet") return TailFamily::frechet;
  if (name == "weibull") return TailFamily::weibull;
  if (name == "folded_normal") return TailFamily::folded_normal;
  if (name == "standard_normal") return TailFamily::standard_normal;
  if (name == "exponential") return TailFamily::exponential;
  if (name == "uniform") return TailFamily::uniform;
  if (name == "custom") return TailFamily::custom;
  throw InputError("unknown tail family: " + name);
}

void ClusterSizeDist::validate() const {
  double cum = 0.0;
  for (double p : pi) {
    if (p < 0.0) throw InputError("cluster-size probabilities must be nonnegative");
    cum += p;
    if (cum > 1.0 + 1e-12)
      throw InputError("cluster-size probabilities sum above 1: " + std::to_string(cum));
  }
}

void GevSpec::validate() const {
  if (!(sigma > 0.0)) throw InputError("GEV scale must be positive");
  if (!(theta > 0.0 && theta <= 1.0))
    throw InputError("extremal index must lie in (0, 1], got " + std::to_string(theta));
  if (cluster) cluster->validate();
}

std::pair<double, double> GevSpec::norming_for(int n) const {
  if (norming) return norming(n);
  return norming_constants(family, n);
}

GevSpec gev_spec_for_family(TailFamily family) {
  GevSpec spec;
  spec.family = family;
  switch (family) {
    case TailFamily::gumbel:
    case TailFamily::exponential:
    case TailFamily::standard_normal:
    case TailFamily::folded_normal:
      spec.mu = 0.0;
      spec.sigma = 1.0;
      spec.xi = 0.0;
      break;
    case TailFamily::frechet:
      spec.mu = 1.0;
      spec.sigma = 1.0;
      spec.xi = 1.0;
      break;
    case TailFamily::weibull:
    case TailFamily::uniform:
      spec.mu = -1.0;
      spec.sigma = 1.0;
      spec.xi = -1.0;
      break;
    case TailFamily::custom:
      break;
  }
  return spec;
}

std::pair<double, double> gev_starred(const GevSpec& spec) {
  spec.validate();
  const double sigma_star = spec.sigma * std::pow(spec.theta, spec.xi);
  double mu_star;
  if (std::abs(spec.xi) < kXiLimit) {
    const double lt = std::log(spec.theta);
    mu_star = spec.mu - spec.sigma * (lt - spec.xi * lt * lt / 2.0);
  } else {
    mu_star = spec.mu - (spec.sigma / spec.xi) * (1.0 - std::pow(spec.theta, -spec.xi));
  }
  return {mu_star, sigma_star};
}

double u_quantile(const GevSpec& spec, int n, double tau) {
  if (!(tau > 0.0)) throw InputError("u_quantile needs tau > 0");
  auto [mu_star, sigma_star] = gev_starred(spec);
  auto [a_n, b_n] = spec.norming_for(n);
  if (!(a_n > 0.0)) throw InputError("norming constant a_N must be positive");
  return a_n * (mu_star + sigma_star * gev_w(tau, spec.xi)) + b_n;
}

std::pair<double, double> norming_constants(TailFamily family, int n) {
  if (n < 2) throw InputError("norming constants need N >= 2");
  const double nd = n;
  switch (family) {
    case TailFamily::uniform:
    case TailFamily::weibull:
      return {1.0 / nd, 1.0};
    case TailFamily::frechet:
      return {nd, 0.0};
    case TailFamily::gumbel:
    case TailFamily::exponential:
      // Standard Gumbel norming for unit-rate exponential tails: b_N = log N.
      return {1.0, std::log(nd)};
    case TailFamily::standard_normal: {
      const double b = normal_quantile(1.0 - 1.0 / nd);
      return {1.0 / (nd * normal_pdf(b)), b};
    }
    case TailFamily::folded_normal: {
      const double b = normal_quantile(1.0 - 1.0 / (2.0 * nd));
      return {1.0 / (2.0 * nd * normal_pdf(b)), b};
    }
    case TailFamily::custom:
      throw InputError("custom tail family requires explicit norming constants");
  }
  throw InputError("unknown tail family");
}

double g1m_independent(double tau, int m) {
  if (m < 1) throw InputError("g1m needs m >= 1");
  if (tau < 0.0) throw InputError("g1m needs tau >= 0");
  if (tau == 0.0) return 1.0;
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(m));
  for (int l = 0; l < m; ++l)
    logs.push_back(l == 0 ? 0.0 : l * std::log(tau) - std::lgamma(l + 1.0));
  return clamp01(std::exp(logsumexp(logs) - tau));
}

double g1m_dependent(double tau, int m, const ClusterSizeDist& cluster) {
  if (m < 1) throw InputError("g1m needs m >= 1");
  if (tau < 0.0) throw InputError("g1m needs tau >= 0");
  cluster.validate();
  if (m == 1) return clamp01(std::exp(-tau));
  if (static_cast<int>(cluster.pi.size()) < m - 1)
    throw InputError("cluster-size distribution has " + std::to_string(cluster.pi.size()) +
                     " entries; need at least m-1 = " + std::to_string(m - 1));
  if (tau == 0.0) return 1.0;

  // conv[l][i] = pi^(*l)(i), the l-fold convolution, for i = 1..m-1.
  std::vector<std::vector<double>> conv(static_cast<std::size_t>(m),
                                        std::vector<double>(static_cast<std::size_t>(m), 0.0));
  for (int i = 1; i <= m - 1; ++i)
    conv[1][static_cast<std::size_t>(i)] = cluster.pi[static_cast<std::size_t>(i - 1)];
  for (int l = 2; l <= m - 1; ++l)
    for (int i = l; i <= m - 1; ++i) {
      double s = 0.0;
      for (int j = 1; j <= i - (l - 1); ++j)
        s += cluster.pi[static_cast<std::size_t>(j - 1)] *
             conv[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(i - j)];
      conv[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] = s;
    }

  std::vector<double> logs;
  logs.push_back(0.0);  // the leading 1
  for (int l = 1; l <= m - 1; ++l) {
    double inner = 0.0;
    for (int i = l; i <= m - 1; ++i)
      inner += conv[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)];
    if (inner > 0.0)
      logs.push_back(l * std::log(tau) - std::lgamma(l + 1.0) + std::log(inner));
  }
  return clamp01(std::exp(logsumexp(logs) - tau));
}

double g1m(const GevSpec& spec, double tau, int m) {
  if (spec.cluster) return g1m_dependent(tau, m, *spec.cluster);
  return g1m_independent(tau, m);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InputError("normal_quantile needs p strictly inside (0,1), got " + std::to_string(p));
  // Acklam's rational approximation, then one Halley refinement.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double folded_normal_cdf(double y) {
  if (y < 0.0) return 0.0;
  return 2.0 * normal_cdf(y) - 1.0;
}

double prop1_lower_bound(double rho0, int m, int n, double sigma_f, double sigma_e, double h_m,
                         const std::function<double(double)>& cdf_abs_loading) {
  if (!(rho0 > 0.0 && rho0 < 1.0)) throw InputError("prop1 needs 0 < rho0 < 1");
  if (m < 1 || m > n) throw InputError("prop1 needs 1 <= m <= N");
  if (!(sigma_f > 0.0 && sigma_e > 0.0)) throw InputError("prop1 needs positive sigma values");
  if (h_m < 0.0) throw InputError("prop1 needs h(m) >= 0");

  const double y_m = std::sqrt((1.0 + h_m) / m * (sigma_e * sigma_e) / (sigma_f * sigma_f) *
                               rho0 / (1.0 - rho0));
  const double f = cdf_abs_loading(y_m);
  if (!(f >= 0.0 && f <= 1.0))
    throw InputError("cdf value " + std::to_string(f) + " outside [0,1] at y_m=" +
                     std::to_string(y_m));
  const double p = 1.0 - f;
  double sum = 0.0;
  for (int j = 0; j < m; ++j) {
    double log_term = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
    if (j > 0) {
      if (p == 0.0) continue;
      log_term += j * std::log(p);
    }
    if (n - j > 0) {
      if (f == 0.0) continue;
      log_term += (n - j) * std::log(f);
    }
    sum += std::exp(log_term);
  }
  return clamp01(1.0 - sum);
}

double one_factor_rho0(int m, int n, const GevSpec& spec, double sigma_f, double sigma_e,
                       double h_m, double tau) {
  if (m < 1) throw InputError("one_factor_rho0 needs m >= 1");
  if (!(sigma_f > 0.0 && sigma_e > 0.0))
    throw InputError("one_factor_rho0 needs positive sigma values");
  if (h_m < 0.0) throw InputError("one_factor_rho0 needs h(m) >= 0");
  const double u = u_quantile(spec, n, tau);
  if (u <= 0.0) return 0.0;
  const double signal = m * sigma_f * sigma_f * u * u;
  return signal / ((1.0 + h_m) * sigma_e * sigma_e + signal);
}

std::vector<BoundResult> one_factor_bound_curve(int m, int n, const GevSpec& spec, double sigma_f,
                                                double sigma_e, double h_m,
                                                const std::vector<double>& taus) {
  std::vector<BoundResult> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    if (!(tau > 0.0)) throw InputError("bound curve needs positive tau grid values");
    BoundResult r;
    r.rho0 = one_factor_rho0(m, n, spec, sigma_f, sigma_e, h_m, tau);
    r.prob_lower_bound = clamp01(1.0 - g1m(spec, tau, m));
    r.params = {m, n, 1, h_m, sigma_e, tau, 1.0, 0.0, {sigma_f * sigma_f}};
    out.push_back(std::move(r));
  }
  return out;
}

BoundResult multi_factor_bound(int m, int n, int k, const std::vector<GevSpec>& specs,
                               const std::vector<double>& signals, double sigma_e, double h_m,
                               double gamma_underbar, double correction_prob, double tau) {
  if (k < 1) throw InputError("multi_factor_bound needs K >= 1");
  if (static_cast<int>(specs.size()) != k || static_cast<int>(signals.size()) != k)
    throw InputError("multi_factor_bound needs one spec and one signal per factor");
  if (!(gamma_underbar > 0.0 && gamma_underbar <= 1.0))
    throw InputError("gamma_underbar must lie in (0, 1], got " + std::to_string(gamma_underbar));
  if (!(correction_prob >= 0.0 && correction_prob <= 1.0))
    throw InputError("correction probability must lie in [0, 1]");
  if (m < 1) throw InputError("multi_factor_bound needs m >= 1");
  if (!(sigma_e > 0.0) || h_m < 0.0) throw InputError("multi_factor_bound: bad noise parameters");

  double harmonic = 0.0;
  double prob = 1.0;
  for (int j = 0; j < k; ++j) {
    if (!(signals[static_cast<std::size_t>(j)] > 0.0))
      throw InputError("signal s_" + std::to_string(j + 1) + " must be positive");
    const double u = u_quantile(specs[static_cast<std::size_t>(j)], n, tau);
    if (u <= 0.0)
      throw InputError("threshold u_{" + std::to_string(j + 1) +
                       ",N}(tau) is not positive at tau=" + std::to_string(tau));
    harmonic += 1.0 / (signals[static_cast<std::size_t>(j)] * u * u);
    prob *= 1.0 - g1m(specs[static_cast<std::size_t>(j)], tau, m);
  }
  BoundResult r;
  r.rho0 = k - (1.0 + h_m) * sigma_e * sigma_e /
                   (m * gamma_underbar * gamma_underbar) * harmonic;
  r.prob_lower_bound = clamp01(prob - correction_prob);
  r.params = {m, n, k, h_m, sigma_e, tau, gamma_underbar, correction_prob, signals};
  return r;
}

double solve_tau_for_rho0(double rho0_target, int m, int n, int k,
                          const std::vector<GevSpec>& specs, double sigma_e, double h_m,
                          const std::vector<double>& signals, double gamma_underbar) {
  if (k < 1 || static_cast<int>(specs.size()) != k || static_cast<int>(signals.size()) != k)
    throw InputError("solve_tau_for_rho0 needs one spec and one signal per factor");

  auto rho0_of = [&](double tau) -> double {
    if (k == 1) {
      return one_factor_rho0(m, n, specs[0], std::sqrt(signals[0]), sigma_e, h_m, tau);
    }
    double harmonic = 0.0;
    for (int j = 0; j < k; ++j) {
      const double u = u_quantile(specs[static_cast<std::size_t>(j)], n, tau);
      if (u <= 0.0) return -std::numeric_limits<double>::infinity();
      harmonic += 1.0 / (signals[static_cast<std::size_t>(j)] * u * u);
    }
    return k - (1.0 + h_m) * sigma_e * sigma_e / (m * gamma_underbar * gamma_underbar) * harmonic;
  };

  // rho0 is decreasing in tau; bisect on log(tau).
  double lo = std::log(1e-300);
  double hi = std::log(1e300);
  const double rho_hi_end = rho0_of(std::exp(lo));  // largest attainable rho0
  const double rho_lo_end = rho0_of(std::exp(hi));
  if (!(rho0_target <= rho_hi_end))
    throw InputError("rho0 target " + std::to_string(rho0_target) +
                     " unattainable; the bound curve tops out at " + std::to_string(rho_hi_end));
  if (!(rho0_target >= rho_lo_end))
    throw InputError("rho0 target " + std::to_string(rho0_target) +
                     " below the attainable range; the curve bottoms out at " +
                     std::to_string(rho_lo_end));
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rho0_of(std::exp(mid)) >= rho0_target)
      lo = mid;
    else
      hi = mid;
  }
  const double tau = std::exp(0.5 * (lo + hi));
  const double achieved = rho0_of(tau);
  if (std::abs(achieved - rho0_target) > 1e-8 * std::max(1.0, std::abs(rho0_target)))
    throw NumericalError("solve_tau_for_rho0 did not converge: achieved rho0 " +
                         std::to_string(achieved) + " vs target " + std::to_string(rho0_target));
  return tau;
}

double rotate_threshold_c_max(int k) {
  if (k < 2) throw InputError("the overlap bound c is defined for K >= 2");
  const double kk = k;
  if (k == 2) return 1.0 / (2.0 * std::sqrt(kk * (kk - 1.0)));
  return (std::sqrt(1.0 + (kk - 2.0) / std::sqrt(kk * (kk - 1.0))) - 1.0) / (kk - 2.0);
}

double gamma_of_c(double c, int k) {
  if (k < 1) throw InputError("gamma_of_c needs K >= 1");
  if (c < 0.0) throw InputError("gamma_of_c needs c >= 0");
  if (k == 1) return 0.0;  // no cross-column terms
  const double cap = rotate_threshold_c_max(k);
  if (c >= cap)
    throw InputError("overlap bound c=" + std::to_string(c) +
                     " outside the admissible range [0, " + std::to_string(cap) +
                     ") for K=" + std::to_string(k));
  const double kk = k;
  return c * (2.0 + c * (kk - 2.0)) * std::sqrt(kk * (kk - 1.0));
}

double rotate_threshold_bound(int m, int k, double sigma_e, double h_m, double c,
                              const std::vector<std::vector<double>>& order_stat_samples,
                              double rho0) {
  if (m < 1) throw InputError("rotate_threshold_bound needs m >= 1");
  if (!(sigma_e > 0.0) || h_m < 0.0)
    throw InputError("rotate_threshold_bound: bad noise parameters");
  if (static_cast<int>(order_stat_samples.size()) != k)
    throw InputError("rotate_threshold_bound needs one sample column per factor");
  if (!(rho0 >= 0.0 && rho0 < k))
    throw InputError("rotate_threshold_bound needs 0 <= rho0 < K");
  const double gamma = gamma_of_c(c, k);
  if (gamma >= 1.0) throw InputError("gamma >= 1: the bound is vacuous");

  const std::size_t reps = order_stat_samples[0].size();
  if (reps == 0) throw InputError("rotate_threshold_bound: empty sample set");
  for (const auto& col : order_stat_samples) {
    if (col.size() != reps)
      throw InputError("rotate_threshold_bound: sample columns have unequal lengths");
    for (double v : col)
      if (v == 0.0) throw InputError("rotate_threshold_bound: zero order-statistic sample");
  }
  const double threshold =
      m * (1.0 - gamma) * (k - rho0) / ((1.0 + h_m) * sigma_e * sigma_e);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      const double v = order_stat_samples[static_cast<std::size_t>(j)][r];
      s += 1.0 / (v * v);
    }
    if (s < threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(reps);
}

double min_singular_value(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) throw InputError("min_singular_value: empty matrix");
  SymEigen eig = symmetric_eigen_full(m.transpose() * m);
  return std::sqrt(std::max(0.0, eig.values(eig.values.size() - 1)));
}

double sigma_min_b_bootstrap(const FactorFit& fit, int m, double gamma_underbar, int reps,
                             std::uint64_t seed) {
  const int n = fit.n_units();
  const int k = fit.k();
  if (reps < 1) throw InputError("bootstrap needs reps >= 1");
  if (m < 1 || m > n) throw InputError("bootstrap needs 1 <= m <= N");
  if (!(gamma_underbar > 0.0 && gamma_underbar <= 1.0))
    throw InputError("gamma_underbar must lie in (0, 1]");

  Eigen::VectorXd sqrt_s = fit.eigenvalues.cwiseSqrt();
  int below = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(seed, static_cast<std::uint64_t>(rep), rng_tag::bootstrap);
    bool done = false;
    for (int attempt = 0; attempt < 100 && !done; ++attempt) {
      std::vector<int> rows(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        rows[static_cast<std::size_t>(i)] =
            static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));

      // Top-m row sets per column of the resampled loadings.
      Eigen::MatrixXd b = Eigen::MatrixXd::Identity(k, k);
      bool degenerate = false;
      for (int l = 0; l < k && !degenerate; ++l) {
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
          return std::abs(fit.loadings(rows[static_cast<std::size_t>(x)], l)) >
                 std::abs(fit.loadings(rows[static_cast<std::size_t>(y)], l));
        });
        double denom = 0.0;
        for (int i = 0; i < m; ++i) {
          const int r = rows[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
          denom += fit.loadings(r, l) * fit.loadings(r, l);
        }
        if (denom <= 1e-300) {
          degenerate = true;
          break;
        }
        for (int kk = 0; kk < k; ++kk) {
          if (kk == l) continue;
          double cross = 0.0;
          for (int i = 0; i < m; ++i) {
            const int r = rows[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
            cross += fit.loadings(r, kk) * fit.loadings(r, l);
          }
          b(kk, l) = sqrt_s(kk) * cross / (sqrt_s(l) * denom);
        }
      }
      if (degenerate) continue;
      if (min_singular_value(b) < gamma_underbar) ++below;
      done = true;
    }
    if (!done)
      throw NumericalError("bootstrap replicate " + std::to_string(rep) +
                           " kept producing degenerate resamples");
  }
  return static_cast<double>(below) / static_cast<double>(reps);
}

double extremal_index_blocks(const std::vector<double>& series, double threshold,
                             int block_length) {
  if (series.empty()) throw InputError("extremal_index_blocks: empty series");
  if (block_length < 1) throw InputError("extremal_index_blocks: block length must be >= 1");
  const std::size_t n = series.size();
  std::size_t blocks_hit = 0;
  std::size_t exceedances = 0;
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(block_length)) {
    const std::size_t end = std::min(n, start + static_cast<std::size_t>(block_length));
    std::size_t in_block = 0;
    for (std::size_t i = start; i < end; ++i)
      if (series[i] > threshold) ++in_block;
    exceedances += in_block;
    if (in_block > 0) ++blocks_hit;
  }
  if (exceedances == 0)
    throw InputError("extremal_index_blocks: no exceedances above threshold " +
                     std::to_string(threshold));
  return std::min(1.0, static_cast<double>(blocks_hit) / static_cast<double>(exceedances));
}

namespace {

double subset_pair_sum(const std::function<double(int, int)>& corr, const std::vector<int>& sel) {
  double s = 0.0;
  for (std::size_t a = 0; a < sel.size(); ++a)
    for (std::size_t b = a + 1; b < sel.size(); ++b) {
      const double c = corr(sel[a], sel[b]);
      if (std::abs(c) > 1.0 + 1e-12)
        throw InputError("pairwise correlation " + std::to_string(c) + " outside [-1, 1]");
      s += c * c;
    }
  return s;
}

}  // namespace

double h_of_m(const std::function<double(int, int)>& corr, int n, int m, HMethod method) {
  if (m < 1) throw InputError("h_of_m needs m >= 1");
  if (m > n) throw InputError("h_of_m: m=" + std::to_string(m) + " exceeds N=" + std::to_string(n));
  if (m == 1) return 0.0;

  if (method == HMethod::exact) {
    double n_subsets = 1.0;
    for (int i = 0; i < m; ++i) n_subsets *= static_cast<double>(n - i) / (i + 1);
    if (n_subsets > 1e6)
      throw InputError("h_of_m: C(" + std::to_string(n) + "," + std::to_string(m) + ") = " +
                       std::to_string(n_subsets) +
                       " exceeds the 1e6 enumeration cutoff; request the greedy method");
    std::vector<int> sel(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) sel[static_cast<std::size_t>(i)] = i;
    double best = 0.0;
    while (true) {
      best = std::max(best, subset_pair_sum(corr, sel));
      // Next combination in lexicographic order.
      int i = m - 1;
      while (i >= 0 && sel[static_cast<std::size_t>(i)] == n - m + i) --i;
      if (i < 0) break;
      ++sel[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < m; ++j)
        sel[static_cast<std::size_t>(j)] = sel[static_cast<std::size_t>(j - 1)] + 1;
    }
    return std::sqrt(2.0 * best);
  }

  // Greedy: seed with the strongest pair, then add the unit that increases
  // the pairwise sum the most. Heuristic lower bound on the exact maximum.
  int bi = 0, bj = 1;
  double bc = -1.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double c = corr(i, j) * corr(i, j);
      if (c > bc) {
        bc = c;
        bi = i;
        bj = j;
      }
    }
  std::vector<int> sel = {bi, bj};
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  used[static_cast<std::size_t>(bi)] = used[static_cast<std::size_t>(bj)] = true;
  double total = bc;
  while (static_cast<int>(sel.size()) < m) {
    int best_u = -1;
    double best_gain = -1.0;
    for (int u = 0; u < n; ++u) {
      if (used[static_cast<std::size_t>(u)]) continue;
      double gain = 0.0;
      for (int s : sel) gain += corr(u, s) * corr(u, s);
      if (gain > best_gain) {
        best_gain = gain;
        best_u = u;
      }
    }
    sel.push_back(best_u);
    used[static_cast<std::size_t>(best_u)] = true;
    total += best_gain;
  }
  return std::sqrt(2.0 * total);
}

}  // namespace proxfact
