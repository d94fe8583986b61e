#include "proxfact/metrics.hpp"

#include <cmath>

#include "proxfact/errors.hpp"
#include "proxfact/sym_eigen.hpp"

namespace proxfact {

namespace {

constexpr double kSingularRatio = 1e-12;

// Inverse and inverse square root of a symmetric PSD Gram matrix through its
// eigendecomposition; errors out when the matrix is numerically singular.
struct GramFactors {
  Eigen::MatrixXd inv;
  Eigen::MatrixXd inv_sqrt;
};

GramFactors gram_factors(const Eigen::MatrixXd& gram, const char* what) {
  SymEigen eig = symmetric_eigen_full(gram);
  const double top = eig.values(0);
  const double bottom = eig.values(eig.values.size() - 1);
  if (!(bottom > kSingularRatio * std::max(top, 1e-300)))
    throw InputError(std::string(what) + ": Gram matrix is numerically singular "
                     "(eigenvalue ratio " + std::to_string(bottom / std::max(top, 1e-300)) + ")");
  Eigen::VectorXd inv_v = eig.values.cwiseInverse();
  Eigen::VectorXd inv_s = eig.values.cwiseSqrt().cwiseInverse();
  GramFactors out;
  out.inv = eig.vectors * inv_v.asDiagonal() * eig.vectors.transpose();
  out.inv_sqrt = eig.vectors * inv_s.asDiagonal() * eig.vectors.transpose();
  return out;
}

}  // namespace

GenCorrResult generalized_correlation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows())
    throw InputError("generalized_correlation: row counts differ (" + std::to_string(a.rows()) +
                     " vs " + std::to_string(b.rows()) + ")");
  if (a.cols() < 1 || b.cols() < 1)
    throw InputError("generalized_correlation: empty factor matrix");

  GramFactors ga = gram_factors(a.transpose() * a, "generalized_correlation(A)");
  GramFactors gb = gram_factors(b.transpose() * b, "generalized_correlation(B)");

  const Eigen::MatrixXd cross = a.transpose() * b;
  // Symmetric similarity transform of the product matrix; same spectrum.
  Eigen::MatrixXd sym =
      ga.inv_sqrt * cross * gb.inv * cross.transpose() * ga.inv_sqrt;
  SymEigen eig = symmetric_eigen_full(0.5 * (sym + sym.transpose()));

  const int k = static_cast<int>(std::min(a.cols(), b.cols()));
  GenCorrResult result;
  result.individual.resize(k);
  result.total = 0.0;
  for (int i = 0; i < k; ++i) {
    double v = eig.values(i);
    if (v > 1.0 + 1e-8)
      result.warnings.push_back("squared canonical value " + std::to_string(v) +
                                " above 1; clipped");
    v = std::min(std::max(v, 0.0), 1.0);
    result.individual(i) = std::sqrt(v);
    result.total += v;
  }
  return result;
}

GenCorrResult loading_generalized_correlation(const Eigen::MatrixXd& l1,
                                              const Eigen::MatrixXd& l2) {
  return generalized_correlation(l1, l2);
}

Eigen::VectorXd per_factor_r2(const Eigen::MatrixXd& target, const Eigen::MatrixXd& regressors,
                              bool include_intercept) {
  if (target.rows() != regressors.rows())
    throw InputError("per_factor_r2: row counts differ");
  const Eigen::Index t = target.rows();
  Eigen::MatrixXd x = regressors;
  if (include_intercept) {
    x.conservativeResize(Eigen::NoChange, x.cols() + 1);
    x.col(x.cols() - 1) = Eigen::VectorXd::Ones(t);
  }
  GramFactors g = gram_factors(x.transpose() * x, "per_factor_r2");
  Eigen::VectorXd out(target.cols());
  for (Eigen::Index j = 0; j < target.cols(); ++j) {
    const Eigen::VectorXd y = target.col(j);
    double sst;
    if (include_intercept) {
      sst = (y.array() - y.mean()).square().sum();
    } else {
      sst = y.squaredNorm();
    }
    if (!(sst > 0.0))
      throw InputError("per_factor_r2: target column " + std::to_string(j + 1) +
                       " has zero variance");
    const Eigen::VectorXd beta = g.inv * (x.transpose() * y);
    const double ssr = (y - x * beta).squaredNorm();
    out(j) = 1.0 - ssr / sst;
  }
  return out;
}

double variance_explained(const Eigen::MatrixXd& x, const Eigen::MatrixXd& factors) {
  if (x.cols() != factors.rows())
    throw InputError("variance_explained: panel has " + std::to_string(x.cols()) +
                     " periods but factors have " + std::to_string(factors.rows()) + " rows");
  const double total = x.squaredNorm();
  if (!(total > 0.0)) throw InputError("variance_explained: panel is identically zero");
  GramFactors g = gram_factors(factors.transpose() * factors, "variance_explained");
  const Eigen::MatrixXd beta = x * factors * g.inv;  // N x K
  const double resid = (x - beta * factors.transpose()).squaredNorm();
  return 1.0 - resid / total;
}

double variance_explained(const Panel& panel, const Eigen::MatrixXd& factors) {
  return variance_explained(panel.values, factors);
}

double rmse_common_component(const Eigen::MatrixXd& x, const Eigen::MatrixXd& predicted) {
  if (x.rows() != predicted.rows() || x.cols() != predicted.cols())
    throw InputError("rmse_common_component: shape mismatch (" + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + " vs " + std::to_string(predicted.rows()) + "x" +
                     std::to_string(predicted.cols()) + ")");
  const double nt = static_cast<double>(x.rows()) * static_cast<double>(x.cols());
  return std::sqrt((x - predicted).squaredNorm() / nt);
}

double rmse_common_component(const Panel& panel, const Eigen::MatrixXd& predicted) {
  return rmse_common_component(panel.values, predicted);
}

}  // namespace proxfact
