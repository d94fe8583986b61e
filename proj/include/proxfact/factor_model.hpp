#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "proxfact/panel.hpp"

namespace proxfact {

// K-factor PCA fit under the identification loadings'loadings/N = I_K,
// factors'factors/T = diag(eigenvalues).
struct FactorFit {
  Eigen::MatrixXd factors;      // T x K
  Eigen::MatrixXd loadings;     // N x K
  Eigen::VectorXd eigenvalues;  // K, descending, strictly positive
  std::vector<std::string> warnings;

  int k() const { return static_cast<int>(eigenvalues.size()); }
  int n_units() const { return static_cast<int>(loadings.rows()); }
  int n_periods() const { return static_cast<int>(factors.rows()); }
};

// Eigendecomposition of X X'/(NT); loadings are sqrt(N) times the top-K
// eigenvectors, factors the cross-sectional regression X'loadings/N. Works
// on the smaller Gram matrix of X. Column signs are fixed so each loading
// column's largest-magnitude entry is positive.
FactorFit pca_fit(const Eigen::MatrixXd& x, int k);
FactorFit pca_fit(const Panel& panel, int k);

Eigen::MatrixXd common_component(const FactorFit& fit);
Eigen::MatrixXd common_component(const Eigen::MatrixXd& loadings,
                                 const Eigen::MatrixXd& factors);

}  // namespace proxfact
