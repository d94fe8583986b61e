#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "proxfact/panel.hpp"

namespace proxfact {

// Generalized correlation between two column spaces:
//   total = tr((A'A)^-1 (A'B) (B'B)^-1 (B'A)), in [0, min(K1, K2)].
// The individual values are the square roots of the eigenvalues of that
// product, each in [0, 1].
struct GenCorrResult {
  double total = 0.0;
  Eigen::VectorXd individual;  // descending
  std::vector<std::string> warnings;
};

GenCorrResult generalized_correlation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
GenCorrResult loading_generalized_correlation(const Eigen::MatrixXd& l1,
                                              const Eigen::MatrixXd& l2);

// R^2 of a regression of each target column on all regressor columns.
// Without an intercept the R^2 is uncentered, matching mean-zero factors.
Eigen::VectorXd per_factor_r2(const Eigen::MatrixXd& target, const Eigen::MatrixXd& regressors,
                              bool include_intercept = false);

// 1 - ||X - Xhat||_F^2 / ||X||_F^2 with Xhat the regression of X on the factors.
double variance_explained(const Eigen::MatrixXd& x, const Eigen::MatrixXd& factors);
double variance_explained(const Panel& panel, const Eigen::MatrixXd& factors);

double rmse_common_component(const Eigen::MatrixXd& x, const Eigen::MatrixXd& predicted);
double rmse_common_component(const Panel& panel, const Eigen::MatrixXd& predicted);

}  // namespace proxfact
