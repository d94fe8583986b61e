#pragma once

// Test-only reference implementations, deliberately independent of the
// library's computational paths.

#include <Eigen/Core>
#include <vector>

namespace oracles {

// Characteristic polynomial coefficients of A via Faddeev-LeVerrier:
// p(x) = x^n + c[1] x^(n-1) + ... + c[n]; returned as {1, c1, ..., cn}.
std::vector<double> char_poly(const Eigen::MatrixXd& a);

// All real roots of a polynomial with only real roots, isolated by Sturm
// sign-change counts and refined by bisection. Descending order.
std::vector<double> sturm_real_roots(const std::vector<double>& coeffs, double lo, double hi,
                                     double tol = 1e-12);

// Least squares through explicit normal equations and Gaussian elimination
// with partial pivoting.
Eigen::VectorXd ols_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

Eigen::MatrixXd naive_matmul(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Eigenvalues of [[a, b], [b, c]] by the quadratic formula, descending.
std::pair<double, double> sym_eig_2x2(double a, double b, double c);

// Smallest singular value of a 2x2 matrix in closed form.
double svd2x2_min(const Eigen::MatrixXd& m);

// l-fold convolution pi^(*l)(i) by explicit enumeration of compositions.
double convolution_bruteforce(const std::vector<double>& pi, int l, int i);

// sum_{j<m} C(N,j) (1-F)^j F^(N-j) with exact Pascal binomials in long double.
double binomial_tail_direct(int n, int m, double f);

// Best single-angle varimax rotation for a two-column loading matrix:
// coarse grid then golden-section refinement. Returns (angle, criterion).
std::pair<double, double> varimax_best_angle(const Eigen::MatrixXd& loadings);

double mean(const std::vector<double>& v);

}  // namespace oracles
