#include "proxfact/proximate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "proxfact/errors.hpp"
#include "proxfact/metrics.hpp"
#include "proxfact/sym_eigen.hpp"

namespace proxfact {

namespace {

constexpr double kConditionCap = 1e12;

// Solve G x = rhs for symmetric positive definite G through the
// self-contained eigensolver, rejecting ill-conditioned systems.
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs,
                          const char* what, const char* hint) {
  SymEigen eig = symmetric_eigen_full(gram);
  const double top = eig.values(0);
  const double bottom = eig.values(eig.values.size() - 1);
  if (!(bottom > 0.0) || top / bottom > kConditionCap)
    throw NumericalError(std::string(what) + ": Gram matrix is singular or ill-conditioned" +
                         (hint && *hint ? std::string("; ") + hint : std::string()));
  return eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.transpose() * rhs;
}

// Indices of the m largest |column| entries, ties broken by lower row index.
std::vector<int> top_m_rows(const Eigen::VectorXd& column, int m) {
  std::vector<int> order(static_cast<std::size_t>(column.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(column(a)) > std::abs(column(b));
  });
  order.resize(static_cast<std::size_t>(m));
  return order;
}

}  // namespace

SparseWeights hard_threshold_weights(const Eigen::MatrixXd& loadings, int m) {
  const int n = static_cast<int>(loadings.rows());
  const int k = static_cast<int>(loadings.cols());
  if (m < 1 || m > n)
    throw InputError("hard_threshold_weights: m=" + std::to_string(m) +
                     " out of range for N=" + std::to_string(n));
  SparseWeights out;
  out.m = m;
  out.weights = Eigen::MatrixXd::Zero(n, k);
  out.mask = Eigen::MatrixXi::Zero(n, k);
  for (int j = 0; j < k; ++j) {
    if (loadings.col(j).cwiseAbs().maxCoeff() == 0.0)
      throw InputError("hard_threshold_weights: loading column " + std::to_string(j + 1) +
                       " is identically zero");
    const std::vector<int> rows = top_m_rows(loadings.col(j), m);
    double norm2 = 0.0;
    for (int i : rows) norm2 += loadings(i, j) * loadings(i, j);
    const double norm = std::sqrt(norm2);
    for (int i : rows) {
      out.weights(i, j) = loadings(i, j) / norm;
      out.mask(i, j) = 1;
    }
  }
  return out;
}

Eigen::MatrixXd proximate_factors(const Eigen::MatrixXd& x, const SparseWeights& weights) {
  if (x.rows() != weights.weights.rows())
    throw InputError("proximate_factors: panel has " + std::to_string(x.rows()) +
                     " units but weights have " + std::to_string(weights.weights.rows()));
  const Eigen::MatrixXd gram = weights.weights.transpose() * weights.weights;
  const Eigen::MatrixXd rhs = weights.weights.transpose() * x;  // K x T
  return spd_solve(gram, rhs, "proximate_factors",
                   "try a larger m or the rotate-and-threshold variant")
      .transpose();
}

Eigen::MatrixXd proximate_factors(const Panel& panel, const SparseWeights& weights) {
  return proximate_factors(panel.values, weights);
}

Eigen::MatrixXd proximate_loadings(const Eigen::MatrixXd& x, const Eigen::MatrixXd& prox_factors) {
  if (x.cols() != prox_factors.rows())
    throw InputError("proximate_loadings: panel has " + std::to_string(x.cols()) +
                     " periods but factors have " + std::to_string(prox_factors.rows()) +
                     " rows");
  const Eigen::MatrixXd gram = prox_factors.transpose() * prox_factors;
  const Eigen::MatrixXd rhs = prox_factors.transpose() * x.transpose();  // K x N
  return spd_solve(gram, rhs, "proximate_loadings", "").transpose();
}

Eigen::MatrixXd proximate_loadings(const Panel& panel, const Eigen::MatrixXd& prox_factors) {
  return proximate_loadings(panel.values, prox_factors);
}

double varimax_criterion(const Eigen::MatrixXd& loadings) {
  const double n = static_cast<double>(loadings.rows());
  double crit = 0.0;
  for (Eigen::Index j = 0; j < loadings.cols(); ++j) {
    const auto sq = loadings.col(j).array().square();
    const double mean_sq = sq.mean();
    crit += sq.square().sum() / n - mean_sq * mean_sq;
  }
  return crit;
}

VarimaxResult varimax_rotation(const Eigen::MatrixXd& loadings, int max_sweeps, double tol) {
  const int k = static_cast<int>(loadings.cols());
  const int n = static_cast<int>(loadings.rows());
  if (k < 2) throw InputError("varimax_rotation needs at least two columns");
  if (n < 2) throw InputError("varimax_rotation needs at least two rows");

  Eigen::MatrixXd x = loadings;
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(k, k);
  VarimaxResult result;
  double crit = varimax_criterion(x);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int a = 0; a < k - 1; ++a) {
      for (int b = a + 1; b < k; ++b) {
        const Eigen::ArrayXd xa = x.col(a).array();
        const Eigen::ArrayXd xb = x.col(b).array();
        const Eigen::ArrayXd u = xa.square() - xb.square();
        const Eigen::ArrayXd v = 2.0 * xa * xb;
        const double su = u.sum();
        const double sv = v.sum();
        const double num = 2.0 * (u * v).sum() - 2.0 * su * sv / n;
        const double den = (u.square() - v.square()).sum() - (su * su - sv * sv) / n;
        const double phi = 0.25 * std::atan2(num, den);
        if (std::abs(phi) < 1e-15) continue;
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        const Eigen::VectorXd ca = x.col(a) * c + x.col(b) * s;
        const Eigen::VectorXd cb = -x.col(a) * s + x.col(b) * c;
        x.col(a) = ca;
        x.col(b) = cb;
        const Eigen::VectorXd pa = p.col(a) * c + p.col(b) * s;
        const Eigen::VectorXd pb = -p.col(a) * s + p.col(b) * c;
        p.col(a) = pa;
        p.col(b) = pb;
      }
    }
    const double next = varimax_criterion(x);
    result.sweeps = sweep;
    if (next - crit < tol * std::max(1.0, std::abs(crit))) {
      crit = std::max(crit, next);
      result.converged = true;
      break;
    }
    crit = next;
  }
  result.rotation = std::move(p);
  result.criterion = crit;
  return result;
}

SparseWeights rotate_threshold_weights(const FactorFit& fit, const RotationSpec& spec, int m,
                                       bool signal_weighted, bool practical) {
  const int n = fit.n_units();
  const int k = fit.k();
  if (m < 1 || m > n)
    throw InputError("rotate_threshold_weights: m=" + std::to_string(m) +
                     " out of range for N=" + std::to_string(n));

  Eigen::MatrixXd v = fit.loadings;
  if (signal_weighted) v = v * fit.eigenvalues.cwiseSqrt().asDiagonal();

  Eigen::MatrixXd p;
  switch (spec.variant) {
    case RotationVariant::none:
      p = Eigen::MatrixXd::Identity(k, k);
      break;
    case RotationVariant::varimax:
      p = varimax_rotation(v).rotation;
      break;
    case RotationVariant::supplied: {
      if (spec.P.rows() != k || spec.P.cols() != k)
        throw InputError("rotate_threshold_weights: supplied P must be K x K");
      const double defect =
          (spec.P.transpose() * spec.P - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
      if (defect > 1e-10)
        throw InputError("rotate_threshold_weights: supplied P is not orthonormal (defect " +
                         std::to_string(defect) + ")");
      p = spec.P;
      break;
    }
  }

  if (practical) {
    // Threshold the raw loadings, then rotate the sparse weights. Column
    // supports become unions of the per-factor supports.
    SparseWeights plain = hard_threshold_weights(fit.loadings, m);
    Eigen::MatrixXd w = plain.weights * fit.eigenvalues.cwiseSqrt().asDiagonal() * p;
    SparseWeights out;
    out.m = m;
    out.weights = Eigen::MatrixXd::Zero(n, k);
    out.mask = Eigen::MatrixXi::Zero(n, k);
    for (int j = 0; j < k; ++j) {
      const double norm = w.col(j).norm();
      if (!(norm > 0.0))
        throw NumericalError("rotate_threshold_weights: rotated column " + std::to_string(j + 1) +
                             " vanished");
      out.weights.col(j) = w.col(j) / norm;
      for (int i = 0; i < n; ++i) out.mask(i, j) = out.weights(i, j) != 0.0 ? 1 : 0;
    }
    return out;
  }

  if (k >= 2) (void)gamma_of_c(spec.c, k);  // validates c against the cap

  const Eigen::MatrixXd vp = v * p;
  SparseWeights out;
  out.m = m;
  out.weights = Eigen::MatrixXd::Zero(n, k);
  out.mask = Eigen::MatrixXi::Zero(n, k);
  std::vector<std::string> shortfalls;
  for (int j = 0; j < k; ++j) {
    std::vector<int> eligible;
    for (int i = 0; i < n; ++i) {
      const double vij = std::abs(vp(i, j));
      if (vij == 0.0) continue;
      bool ok = true;
      for (int kk = 0; kk < k && ok; ++kk) {
        if (kk == j) continue;
        if (!(std::abs(vp(i, kk)) < spec.c * vij)) ok = false;
      }
      if (ok) eligible.push_back(i);
    }
    if (static_cast<int>(eligible.size()) < m) {
      shortfalls.push_back("column " + std::to_string(j + 1) + ": " +
                           std::to_string(eligible.size()) + " of " + std::to_string(m) +
                           " eligible rows");
      continue;
    }
    std::stable_sort(eligible.begin(), eligible.end(), [&](int a, int b) {
      return std::abs(vp(a, j)) > std::abs(vp(b, j));
    });
    eligible.resize(static_cast<std::size_t>(m));
    double norm2 = 0.0;
    for (int i : eligible) norm2 += vp(i, j) * vp(i, j);
    const double norm = std::sqrt(norm2);
    for (int i : eligible) {
      out.weights(i, j) = vp(i, j) / norm;
      out.mask(i, j) = 1;
    }
  }
  if (!shortfalls.empty()) {
    std::string msg = "rotate_threshold_weights: too few rows satisfy the overlap bound c=" +
                      std::to_string(spec.c);
    for (const auto& s : shortfalls) msg += "; " + s;
    throw InputError(msg);
  }
  return out;
}

int choose_m_data_driven(const Panel& train, int k, double target_rho_avg, bool use_bisection) {
  if (!(target_rho_avg >= 0.0 && target_rho_avg <= 1.0))
    throw InputError("choose_m_data_driven: target must lie in [0, 1]");
  const FactorFit fit = pca_fit(train, k);
  const int n = train.n_units();

  auto rho_avg = [&](int m) -> double {
    try {
      const SparseWeights w = hard_threshold_weights(fit.loadings, m);
      const Eigen::MatrixXd prox = proximate_factors(train.values, w);
      return generalized_correlation(fit.factors, prox).total / k;
    } catch (const NumericalError&) {
      return -1.0;
    }
  };

  if (rho_avg(n) < target_rho_avg - 1e-9)
    throw NumericalError("choose_m_data_driven: target not reached even at m = N");

  if (use_bisection) {
    int lo = 1, hi = n;
    while (lo < hi) {
      const int mid = lo + (hi - lo) / 2;
      if (rho_avg(mid) >= target_rho_avg)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }
  for (int m = 1; m <= n; ++m)
    if (rho_avg(m) >= target_rho_avg) return m;
  return n;
}

int choose_m_theory(const TheoryBoundConfig& config, double target_prob, double target_rho) {
  if (config.n < 2) throw InputError("choose_m_theory: config.n must be >= 2");
  if (config.k < 1 || static_cast<int>(config.specs.size()) != config.k ||
      static_cast<int>(config.signals.size()) != config.k)
    throw InputError("choose_m_theory: need one spec and one signal per factor");
  if (!(target_prob >= 0.0 && target_prob <= 1.0))
    throw InputError("choose_m_theory: target probability must lie in [0, 1]");
  if (!(target_rho > 0.0 && target_rho <= 1.0))
    throw InputError("choose_m_theory: target rho/K must lie in (0, 1]");

  const double rho0 = target_rho * config.k;
  double best_prob = -1.0;
  int best_m = 1;
  for (int m = 1; m <= config.n; ++m) {
    const double h = config.h_of_m ? config.h_of_m(m) : 0.0;
    double prob = 0.0;
    try {
      const double tau = solve_tau_for_rho0(rho0, m, config.n, config.k, config.specs,
                                            config.sigma_e, h, config.signals,
                                            config.gamma_underbar);
      if (config.k == 1) {
        prob = std::min(std::max(1.0 - g1m(config.specs[0], tau, m), 0.0), 1.0);
      } else {
        prob = multi_factor_bound(m, config.n, config.k, config.specs, config.signals,
                                  config.sigma_e, h, config.gamma_underbar,
                                  config.correction_prob, tau)
                   .prob_lower_bound;
      }
    } catch (const InputError&) {
      prob = 0.0;  // target rho0 unattainable at this m
    }
    if (prob >= target_prob) return m;
    if (prob > best_prob) {
      best_prob = prob;
      best_m = m;
    }
  }
  throw InputError("choose_m_theory: no m guarantees probability " + std::to_string(target_prob) +
                   "; best achievable bound is " + std::to_string(std::max(best_prob, 0.0)) +
                   " at m=" + std::to_string(best_m));
}

Table composition_report(const Panel& panel, const SparseWeights& weights) {
  if (!panel.group_of_unit)
    throw InputError("composition_report: panel has no unit group labels");
  if (panel.n_units() != static_cast<int>(weights.weights.rows()))
    throw InputError("composition_report: panel and weights disagree on N");
  const int k = static_cast<int>(weights.weights.cols());

  std::map<std::string, std::vector<double>> counts;
  for (int i = 0; i < panel.n_units(); ++i) {
    auto it = panel.group_of_unit->find(panel.unit_ids[static_cast<std::size_t>(i)]);
    const std::string group = it == panel.group_of_unit->end() ? "ungrouped" : it->second;
    auto& row = counts.try_emplace(group, std::vector<double>(static_cast<std::size_t>(k), 0.0))
                    .first->second;
    for (int j = 0; j < k; ++j)
      if (weights.mask(i, j)) row[static_cast<std::size_t>(j)] += 1.0;
  }
  std::vector<std::string> cols;
  for (int j = 1; j <= k; ++j) cols.push_back("factor_" + std::to_string(j));
  Table table("group", cols);
  for (const auto& [group, row] : counts) table.add_row(group, row);
  return table;
}

}  // namespace proxfact
