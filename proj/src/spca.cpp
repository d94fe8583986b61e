#include "proxfact/spca.hpp"

#include "proxfact/proximate.hpp"

#include <algorithm>
#include <cmath>

#include "proxfact/errors.hpp"
#include "proxfact/sym_eigen.hpp"

namespace proxfact {

namespace {

double soft_threshold(double value, double amount) {
  const double shrunk = std::abs(value) - amount;
  return shrunk > 0.0 ? (value > 0.0 ? shrunk : -shrunk) : 0.0;
}

bool gram_is_diagonal(const Eigen::MatrixXd& gram) {
  const double diag_scale = gram.diagonal().cwiseAbs().maxCoeff();
  double off = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
      if (i != j) off = std::max(off, std::abs(gram(i, j)));
  return off <= 1e-8 * std::max(diag_scale, 1e-300);
}

}  // namespace

int SpcaFit::nnz_total() const {
  int total = 0;
  for (int c : nnz_per_column) total += c;
  return total;
}

Eigen::MatrixXd spca_lasso_loadings(const Eigen::MatrixXd& x, const Eigen::MatrixXd& pca_factors,
                                    double alpha) {
  if (x.cols() != pca_factors.rows())
    throw InputError("spca_lasso_loadings: panel has " + std::to_string(x.cols()) +
                     " periods but factors have " + std::to_string(pca_factors.rows()) + " rows");
  if (alpha < 0.0) throw InputError("spca_lasso_loadings: alpha must be nonnegative");

  const Eigen::MatrixXd gram = pca_factors.transpose() * pca_factors;
  const int n = static_cast<int>(x.rows());
  const int k = static_cast<int>(pca_factors.cols());

  if (gram_is_diagonal(gram)) {
    // First-order condition of the penalized objective, column separable:
    // lambda_ij = sign(ols_ij) * max(|ols_ij| - alpha / (2 (F'F)_jj), 0).
    Eigen::MatrixXd out(n, k);
    const Eigen::MatrixXd xf = x * pca_factors;
    for (int j = 0; j < k; ++j) {
      const double g = gram(j, j);
      if (!(g > 0.0))
        throw NumericalError("spca_lasso_loadings: factor column " + std::to_string(j + 1) +
                             " has zero norm");
      const double amount = alpha / (2.0 * g);
      for (int i = 0; i < n; ++i) out(i, j) = soft_threshold(xf(i, j) / g, amount);
    }
    return out;
  }

  // Non-orthogonal design: cyclic coordinate descent per panel row.
  SymEigen eig = symmetric_eigen_full(gram);
  if (!(eig.values(eig.values.size() - 1) > 1e-12 * std::max(eig.values(0), 1e-300)))
    throw NumericalError("spca_lasso_loadings: factor Gram is singular");
  const Eigen::MatrixXd gram_inv =
      eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.transpose();
  const Eigen::MatrixXd xf = x * pca_factors;
  Eigen::MatrixXd out = xf * gram_inv;  // warm start at OLS
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd b = out.row(i).transpose();
    double prev_obj = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 10000; ++pass) {
      for (int j = 0; j < k; ++j) {
        double partial = xf(i, j);
        for (int l = 0; l < k; ++l)
          if (l != j) partial -= gram(j, l) * b(l);
        b(j) = soft_threshold(partial, alpha / 2.0) / gram(j, j);
      }
      const double fit_term =
          x.row(i).squaredNorm() - 2.0 * xf.row(i).dot(b) + b.dot(gram * b);
      const double obj = fit_term + alpha * b.cwiseAbs().sum();
      if (prev_obj - obj < 1e-10 * std::max(1.0, std::abs(obj))) break;
      prev_obj = obj;
    }
    out.row(i) = b.transpose();
  }
  return out;
}

Eigen::MatrixXd spca_factors(const Eigen::MatrixXd& x, const Eigen::MatrixXd& sparse_loadings) {
  if (x.rows() != sparse_loadings.rows())
    throw InputError("spca_factors: panel has " + std::to_string(x.rows()) +
                     " units but loadings have " + std::to_string(sparse_loadings.rows()));
  for (Eigen::Index j = 0; j < sparse_loadings.cols(); ++j)
    if (sparse_loadings.col(j).cwiseAbs().maxCoeff() == 0.0)
      throw InputError("spca_factors: loading column " + std::to_string(j + 1) +
                       " is identically zero (penalty too large)");
  const Eigen::MatrixXd gram = sparse_loadings.transpose() * sparse_loadings;
  SymEigen eig = symmetric_eigen_full(gram);
  if (!(eig.values(eig.values.size() - 1) > 1e-12 * std::max(eig.values(0), 1e-300)))
    throw NumericalError("spca_factors: loading Gram is singular");
  const Eigen::MatrixXd gram_inv =
      eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.transpose();
  return x.transpose() * sparse_loadings * gram_inv;
}

Eigen::MatrixXd spca_modified_loadings(const Eigen::MatrixXd& x,
                                       const Eigen::MatrixXd& spca_factors) {
  // Identical contract to the proximate second-stage loading regression.
  return proximate_loadings(x, spca_factors);
}

namespace {

int count_nonzeros(const Eigen::MatrixXd& x, const FactorFit& fit, double alpha) {
  // Counting needs no regression: nonzero iff |ols loading| > alpha/(2 g_jj).
  const Eigen::MatrixXd gram = fit.factors.transpose() * fit.factors;
  const Eigen::MatrixXd xf = x * fit.factors;
  int count = 0;
  for (Eigen::Index j = 0; j < xf.cols(); ++j) {
    const double g = gram(j, j);
    const double amount = alpha / (2.0 * g);
    for (Eigen::Index i = 0; i < xf.rows(); ++i)
      if (std::abs(xf(i, j) / g) > amount) ++count;
  }
  return count;
}

}  // namespace

AlphaMatch match_alpha_to_m(const Eigen::MatrixXd& x, const FactorFit& fit, int m) {
  const int n = static_cast<int>(x.rows());
  const int k = fit.k();
  if (m < 1 || m > n)
    throw InputError("match_alpha_to_m: m=" + std::to_string(m) + " out of range for N=" +
                     std::to_string(n));
  const int target = m * k;

  // Upper bracket: everything is shrunk to zero.
  const Eigen::MatrixXd gram = fit.factors.transpose() * fit.factors;
  const Eigen::MatrixXd xf = x * fit.factors;
  double alpha_hi = 0.0;
  for (Eigen::Index j = 0; j < xf.cols(); ++j)
    for (Eigen::Index i = 0; i < xf.rows(); ++i)
      alpha_hi = std::max(alpha_hi, 2.0 * std::abs(xf(i, j)));
  alpha_hi = alpha_hi * (1.0 + 1e-9) + 1.0;

  AlphaMatch result;
  if (count_nonzeros(x, fit, 0.0) < target) {
    result.alpha = 0.0;
    result.achieved_nnz = count_nonzeros(x, fit, 0.0);
    result.exact = result.achieved_nnz == target;
    if (!result.exact)
      result.warning = "fewer than " + std::to_string(target) +
                       " nonzero OLS loadings; returning alpha = 0 with " +
                       std::to_string(result.achieved_nnz);
    return result;
  }

  // Bisection on the nonincreasing count map.
  double lo = 0.0, hi = alpha_hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_nonzeros(x, fit, mid) >= target)
      lo = mid;
    else
      hi = mid;
  }
  const int count_lo = count_nonzeros(x, fit, lo);
  if (count_lo != target) {
    // Ties make the count jump over the target; hi sits just past the jump,
    // on the nearest plateau below.
    const int count_hi = count_nonzeros(x, fit, hi);
    result.alpha = hi;
    result.achieved_nnz = count_hi;
    result.exact = false;
    result.warning = "nonzero count jumps from " + std::to_string(count_lo) + " to " +
                     std::to_string(count_hi) + " past the target " + std::to_string(target);
    return result;
  }

  // Expand to the right edge of the plateau: the largest alpha keeping the
  // exact count.
  double in_lo = lo, out_hi = hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (in_lo + out_hi);
    if (count_nonzeros(x, fit, mid) == target)
      in_lo = mid;
    else
      out_hi = mid;
  }
  result.alpha = in_lo;
  result.achieved_nnz = target;
  result.exact = true;
  return result;
}

SpcaFit spca_fit_alpha(const Eigen::MatrixXd& x, const FactorFit& fit, double alpha) {
  SpcaFit out;
  out.alpha = alpha;
  out.sparse_loadings = spca_lasso_loadings(x, fit.factors, alpha);
  out.nnz_per_column.assign(static_cast<std::size_t>(fit.k()), 0);
  for (Eigen::Index j = 0; j < out.sparse_loadings.cols(); ++j)
    for (Eigen::Index i = 0; i < out.sparse_loadings.rows(); ++i)
      if (out.sparse_loadings(i, j) != 0.0) ++out.nnz_per_column[static_cast<std::size_t>(j)];
  try {
    out.factors = spca_factors(x, out.sparse_loadings);
  } catch (const InputError& e) {
    throw InputError(std::string(e.what()) + " at alpha=" + std::to_string(alpha));
  }
  return out;
}

}  // namespace proxfact
