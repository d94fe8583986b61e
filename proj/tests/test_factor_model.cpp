#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "proxfact/errors.hpp"
#include "proxfact/factor_model.hpp"
#include "proxfact/metrics.hpp"
#include "proxfact/rng.hpp"

using namespace proxfact;

namespace {

void check_fit_invariants(const FactorFit& fit) {
  const int n = fit.n_units();
  const int t = fit.n_periods();
  const Eigen::MatrixXd lam_gram = fit.loadings.transpose() * fit.loadings / n;
  CHECK((lam_gram - Eigen::MatrixXd::Identity(fit.k(), fit.k())).cwiseAbs().maxCoeff() <= 1e-8);
  const Eigen::MatrixXd f_gram = fit.factors.transpose() * fit.factors / t;
  for (int i = 0; i < fit.k(); ++i) {
    for (int j = 0; j < fit.k(); ++j) {
      if (i == j)
        CHECK(f_gram(i, j) == doctest::Approx(fit.eigenvalues(i)).epsilon(1e-8));
      else
        CHECK(std::abs(f_gram(i, j)) <= 1e-8 * std::max(1.0, fit.eigenvalues(0)));
    }
  }
  for (int i = 1; i < fit.k(); ++i) CHECK(fit.eigenvalues(i - 1) >= fit.eigenvalues(i));
  CHECK(fit.eigenvalues(fit.k() - 1) > 0.0);
}

Eigen::MatrixXd noiseless_panel(int n, int t, int k, std::uint64_t seed, Eigen::MatrixXd* f_out,
                                Eigen::MatrixXd* l_out) {
  Rng rng(seed);
  Eigen::MatrixXd f = rng.normal_matrix(t, k);
  Eigen::MatrixXd l = rng.normal_matrix(n, k);
  if (f_out) *f_out = f;
  if (l_out) *l_out = l;
  return l * f.transpose();
}

}  // namespace

TEST_CASE("noiseless panel is reconstructed exactly and spans the true factors") {
  Eigen::MatrixXd f, l;
  Eigen::MatrixXd x = noiseless_panel(12, 30, 2, 5, &f, &l);
  FactorFit fit = pca_fit(x, 2);
  check_fit_invariants(fit);
  CHECK((common_component(fit) - x).cwiseAbs().maxCoeff() <= 1e-8 * x.cwiseAbs().maxCoeff());
  CHECK(generalized_correlation(fit.factors, f).total == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("single unit, single factor") {
  Eigen::MatrixXd x(1, 5);
  x << 1, -2, 3, -4, 5;
  FactorFit fit = pca_fit(x, 1);
  CHECK(std::abs(fit.loadings(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  // Sign convention makes the loading +1, so the factor equals the row.
  CHECK(fit.loadings(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((fit.factors.transpose() - x).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("factors equal the independent normal-equations regression of X on loadings") {
  Rng rng(77);
  Eigen::MatrixXd x = rng.normal_matrix(8, 12);
  FactorFit fit = pca_fit(x, 2);
  check_fit_invariants(fit);
  for (int t = 0; t < 12; ++t) {
    const Eigen::VectorXd beta = oracles::ols_solve(fit.loadings, x.col(t));
    CHECK((fit.factors.row(t).transpose() - beta).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("both gram sides produce valid fits with matching spectra") {
  Rng rng(78);
  Eigen::MatrixXd x = rng.normal_matrix(9, 21);  // N < T: unit-side Gram
  FactorFit a = pca_fit(x, 3);
  check_fit_invariants(a);

  // The transposed panel goes through the time-side Gram; the nonzero
  // spectrum of XX'/(NT) is shared.
  FactorFit c = pca_fit(Eigen::MatrixXd(x.transpose()), 3);
  for (int j = 0; j < 3; ++j)
    CHECK(a.eigenvalues(j) == doctest::Approx(c.eigenvalues(j)).epsilon(1e-10));
  check_fit_invariants(c);
}

TEST_CASE("common component matches a naive triple-loop product") {
  Rng rng(79);
  Eigen::MatrixXd x = rng.normal_matrix(6, 10);
  FactorFit fit = pca_fit(x, 2);
  const Eigen::MatrixXd direct = oracles::naive_matmul(fit.loadings, fit.factors.transpose());
  CHECK((common_component(fit) - direct).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("full-rank reconstruction on a square panel") {
  Rng rng(80);
  Eigen::MatrixXd x = rng.normal_matrix(6, 6);
  FactorFit fit = pca_fit(x, 6);
  CHECK((common_component(fit) - x).cwiseAbs().maxCoeff() <= 1e-8 * x.cwiseAbs().maxCoeff());
}

TEST_CASE("scale equivariance: factors scale, loadings do not") {
  Rng rng(81);
  Eigen::MatrixXd x = rng.normal_matrix(7, 15);
  FactorFit base = pca_fit(x, 2);
  FactorFit scaled = pca_fit(Eigen::MatrixXd(3.0 * x), 2);
  CHECK((scaled.loadings - base.loadings).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((scaled.factors - 3.0 * base.factors).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("pca_fit is bit-deterministic across calls") {
  Rng rng(82);
  Eigen::MatrixXd x = rng.normal_matrix(10, 14);
  FactorFit a = pca_fit(x, 3);
  FactorFit b = pca_fit(x, 3);
  CHECK((a.loadings - b.loadings).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.factors - b.factors).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rank deficiency is a numerical error") {
  Eigen::MatrixXd x = noiseless_panel(5, 8, 1, 9, nullptr, nullptr);  // rank one
  CHECK_THROWS_AS(pca_fit(x, 3), NumericalError);
}

TEST_CASE("tied leading eigenvalues raise a warning") {
  // Exactly symmetric two-block design: eigenvalues 1 and 2 coincide.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 4);
  x(0, 0) = x(1, 1) = 1.0;
  x(2, 2) = x(3, 3) = 1.0;
  FactorFit fit = pca_fit(x, 1);
  REQUIRE(!fit.warnings.empty());
  CHECK(fit.warnings[0].find("tied") != std::string::npos);
}

TEST_CASE("K out of range is an input error") {
  Rng rng(83);
  Eigen::MatrixXd x = rng.normal_matrix(4, 6);
  CHECK_THROWS_AS(pca_fit(x, 5), InputError);
  CHECK_THROWS_AS(pca_fit(x, 0), InputError);
}

TEST_CASE("variance explained by the top-K factors equals the eigenvalue share") {
  Rng rng(84);
  Eigen::MatrixXd x = rng.normal_matrix(12, 18);
  const int k = 3;
  FactorFit fit = pca_fit(x, k);
  const double ve = variance_explained(x, fit.factors);
  const Eigen::MatrixXd gram = x * x.transpose() / (12.0 * 18.0);
  const double share = fit.eigenvalues.sum() / gram.trace();
  CHECK(ve == doctest::Approx(share).epsilon(1e-10));
}
