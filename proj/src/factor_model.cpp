#include "proxfact/factor_model.hpp"

#include <cmath>

#include "proxfact/errors.hpp"
#include "proxfact/sym_eigen.hpp"

namespace proxfact {

namespace {

// Flip column signs so the entry with the largest magnitude is positive;
// the first such entry wins on exact ties. Makes the fit deterministic.
void canonicalize_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double v = std::abs(m(i, j));
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    if (m(arg, j) < 0.0) m.col(j) = -m.col(j);
  }
}

}  // namespace

FactorFit pca_fit(const Eigen::MatrixXd& x, int k) {
  const int n = static_cast<int>(x.rows());
  const int t = static_cast<int>(x.cols());
  if (n < 1 || t < 1) throw InputError("pca_fit: empty panel");
  if (!x.allFinite()) throw InputError("pca_fit: panel contains non-finite entries");
  const int rank_cap = std::min(n, t);
  if (k < 1 || k > rank_cap)
    throw InputError("pca_fit: K=" + std::to_string(k) + " out of range for N=" +
                     std::to_string(n) + ", T=" + std::to_string(t));

  // Work on the smaller Gram matrix; both have the same nonzero spectrum.
  const bool use_units = n <= t;
  const double nt = static_cast<double>(n) * static_cast<double>(t);
  Eigen::MatrixXd gram;
  if (use_units)
    gram.noalias() = x * x.transpose() / nt;
  else
    gram.noalias() = x.transpose() * x / nt;

  const int want = std::min(k + 1, rank_cap);  // one extra for the tie check
  SymEigen eig = symmetric_eigen(gram, want);

  FactorFit fit;
  fit.eigenvalues = eig.values.head(k);
  // Relative floor: exact zeros of a rank-deficient Gram come out as
  // O(eps * s_1) noise of either sign.
  const double floor = 1e-12 * std::max(eig.values(0), 0.0);
  for (int j = 0; j < k; ++j) {
    if (!(fit.eigenvalues(j) > floor))
      throw NumericalError("pca_fit: eigenvalue " + std::to_string(j + 1) +
                           " is not positive (" + std::to_string(fit.eigenvalues(j)) +
                           "); K exceeds the panel's effective rank");
  }
  if (want > k) {
    const double gap = fit.eigenvalues(k - 1) - eig.values(k);
    if (gap <= 1e-12 * std::max(1.0, fit.eigenvalues(0)))
      fit.warnings.push_back(
          "eigenvalues " + std::to_string(k) + " and " + std::to_string(k + 1) +
          " are numerically tied; the factor rotation is indeterminate");
  }

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  if (use_units) {
    fit.loadings = sqrt_n * eig.vectors.leftCols(k);
  } else {
    // Map eigenvectors of X'X back through X: ||X u_j||^2 = NT s_j.
    fit.loadings.resize(n, k);
    for (int j = 0; j < k; ++j)
      fit.loadings.col(j) =
          x * eig.vectors.col(j) / std::sqrt(static_cast<double>(t) * fit.eigenvalues(j));
  }
  canonicalize_signs(fit.loadings);
  fit.factors.noalias() = x.transpose() * fit.loadings / static_cast<double>(n);
  return fit;
}

FactorFit pca_fit(const Panel& panel, int k) {
  panel.validate();
  return pca_fit(panel.values, k);
}

Eigen::MatrixXd common_component(const Eigen::MatrixXd& loadings,
                                 const Eigen::MatrixXd& factors) {
  if (loadings.cols() != factors.cols())
    throw InputError("common_component: loadings have " + std::to_string(loadings.cols()) +
                     " columns but factors have " + std::to_string(factors.cols()));
  return loadings * factors.transpose();
}

Eigen::MatrixXd common_component(const FactorFit& fit) {
  return common_component(fit.loadings, fit.factors);
}

}  // namespace proxfact
