#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "proxfact/factor_model.hpp"
#include "proxfact/panel.hpp"

namespace proxfact {

struct SpcaFit {
  Eigen::MatrixXd sparse_loadings;  // N x K
  Eigen::MatrixXd factors;          // T x K
  double alpha = 0.0;
  std::vector<int> nnz_per_column;
  int nnz_total() const;
};

// Minimizer of ||X - Lambda F'||_F^2 + alpha ||Lambda||_1 for fixed factors.
// With a diagonal factor Gram (PCA factors) the exact solution is
// elementwise soft thresholding of the OLS loadings by alpha / (2 (F'F)_jj);
// otherwise cyclic coordinate descent runs to an objective stall.
Eigen::MatrixXd spca_lasso_loadings(const Eigen::MatrixXd& x, const Eigen::MatrixXd& pca_factors,
                                    double alpha);

// F_bar = X' Lambda_bar (Lambda_bar' Lambda_bar)^-1.
Eigen::MatrixXd spca_factors(const Eigen::MatrixXd& x, const Eigen::MatrixXd& sparse_loadings);

// Second-stage non-sparse loadings on the sparse-PCA factors.
Eigen::MatrixXd spca_modified_loadings(const Eigen::MatrixXd& x,
                                       const Eigen::MatrixXd& spca_factors);

struct AlphaMatch {
  double alpha = 0.0;
  int achieved_nnz = 0;
  bool exact = false;
  std::string warning;  // set when the count jumps over the target
};

// Largest alpha whose soft-thresholded loadings keep exactly m*K nonzeros in
// total, found by bisection on the monotone nonzero-count map. When ties make
// the exact count unattainable, returns the nearest count below with a
// warning.
AlphaMatch match_alpha_to_m(const Eigen::MatrixXd& x, const FactorFit& fit, int m);

SpcaFit spca_fit_alpha(const Eigen::MatrixXd& x, const FactorFit& fit, double alpha);

}  // namespace proxfact
