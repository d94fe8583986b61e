#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "proxfact/csv.hpp"
#include "proxfact/evt.hpp"
#include "proxfact/factor_model.hpp"
#include "proxfact/panel.hpp"

namespace proxfact {

// Column-sparse factor weights: exactly m nonzeros per column (theory
// variants), unit Euclidean column norms.
struct SparseWeights {
  Eigen::MatrixXd weights;  // N x K
  Eigen::MatrixXi mask;     // 0/1 nonzero pattern
  int m = 0;                // requested nonzeros per column
};

// Keep the m largest |loading| entries per column, zero the rest, normalize
// each column to unit norm. Ties at the m-th largest break toward the lower
// row index.
SparseWeights hard_threshold_weights(const Eigen::MatrixXd& loadings, int m);

// F_tilde = X' W (W'W)^-1.
Eigen::MatrixXd proximate_factors(const Eigen::MatrixXd& x, const SparseWeights& weights);
Eigen::MatrixXd proximate_factors(const Panel& panel, const SparseWeights& weights);

// Second-stage loadings: Lambda_tilde = X F (F'F)^-1. This is the
// dimension-consistent reading of the loading regression.
Eigen::MatrixXd proximate_loadings(const Eigen::MatrixXd& x, const Eigen::MatrixXd& prox_factors);
Eigen::MatrixXd proximate_loadings(const Panel& panel, const Eigen::MatrixXd& prox_factors);

struct VarimaxResult {
  Eigen::MatrixXd rotation;  // K x K orthonormal
  double criterion = 0.0;
  bool converged = false;
  int sweeps = 0;
};

// Sum over columns of the variance of squared loadings.
double varimax_criterion(const Eigen::MatrixXd& loadings);
// Pairwise-rotation ascent to a local optimum of the varimax criterion.
// Returns the best iterate with converged=false if the sweep cap is hit.
VarimaxResult varimax_rotation(const Eigen::MatrixXd& loadings, int max_sweeps = 100,
                               double tol = 1e-10);

enum class RotationVariant { none, varimax, supplied };

struct RotationSpec {
  Eigen::MatrixXd P;  // used when variant == supplied
  double c = 0.0;     // overlap bound, in [0, c_max(K))
  RotationVariant variant = RotationVariant::none;
};

// Rotate-and-threshold sparse weights.
//   theory variant (practical = false): rotate V = loadings * S^1/2 (or the
//   raw loadings when signal_weighted is off) by P, keep per column j the m
//   largest |entries| among rows with max_{k != j} |v_ik / v_ij| < c.
//   practical variant: plain hard threshold, then post-multiply by S^1/2 P
//   and renormalize columns; the nonzero pattern is the union over columns.
SparseWeights rotate_threshold_weights(const FactorFit& fit, const RotationSpec& spec, int m,
                                       bool signal_weighted = true, bool practical = false);

// Smallest m whose proximate factors reach the target average generalized
// correlation with the PCA factors on the training panel. Linear scan by
// default; bisection assumes monotonicity and is opt-in.
int choose_m_data_driven(const Panel& train, int k, double target_rho_avg,
                         bool use_bisection = false);

// Parameters feeding the theoretical bound curves of choose_m_theory.
struct TheoryBoundConfig {
  int n = 0;
  int k = 1;
  std::vector<GevSpec> specs;     // per factor
  std::vector<double> signals;    // s_j; one factor: sigma_f^2
  double sigma_e = 1.0;
  std::function<double(int)> h_of_m;  // optional; zero when absent
  double gamma_underbar = 1.0;
  double correction_prob = 0.0;
};

// Smallest m whose bound guarantees P(rho/K >= target_rho) >= target_prob.
int choose_m_theory(const TheoryBoundConfig& config, double target_prob, double target_rho);

// Nonzero counts per (group label, factor), for composition reports.
Table composition_report(const Panel& panel, const SparseWeights& weights);

}  // namespace proxfact
