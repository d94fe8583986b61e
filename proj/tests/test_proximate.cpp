#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "proxfact/errors.hpp"
#include "proxfact/factor_model.hpp"
#include "proxfact/metrics.hpp"
#include "proxfact/proximate.hpp"
#include "proxfact/rng.hpp"
#include "proxfact/simulate.hpp"

using namespace proxfact;

TEST_CASE("hard threshold keeps the m largest magnitudes and normalizes") {
  Eigen::MatrixXd lam(4, 1);
  lam << 3, -1, 0.5, 2;
  SparseWeights w = hard_threshold_weights(lam, 2);
  CHECK(w.mask(0, 0) == 1);
  CHECK(w.mask(3, 0) == 1);
  CHECK(w.mask(1, 0) == 0);
  const double norm = std::sqrt(13.0);
  CHECK(w.weights(0, 0) == doctest::Approx(3.0 / norm).epsilon(1e-14));
  CHECK(w.weights(3, 0) == doctest::Approx(2.0 / norm).epsilon(1e-14));
  CHECK(w.weights.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("m = N reproduces the normalized loading column") {
  Rng rng(20);
  Eigen::MatrixXd lam = rng.normal_matrix(6, 2);
  SparseWeights w = hard_threshold_weights(lam, 6);
  for (int j = 0; j < 2; ++j)
    CHECK((w.weights.col(j) - lam.col(j) / lam.col(j).norm()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("m = 1 yields a signed indicator at the argmax") {
  Eigen::MatrixXd lam(3, 1);
  lam << 0.5, -2.0, 1.0;
  SparseWeights w = hard_threshold_weights(lam, 1);
  CHECK(w.weights(1, 0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(w.mask.col(0).sum() == 1);
}

TEST_CASE("threshold ties break toward the lower row index") {
  Eigen::MatrixXd lam(3, 1);
  lam << 2.0, -2.0, 1.0;
  SparseWeights w = hard_threshold_weights(lam, 1);
  CHECK(w.mask(0, 0) == 1);
  CHECK(w.mask(1, 0) == 0);
}

TEST_CASE("zero loading column is rejected") {
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(4, 2);
  lam.col(0) << 1, 2, 3, 4;
  CHECK_THROWS_AS(hard_threshold_weights(lam, 2), InputError);
}

TEST_CASE("single-unit weight reproduces that unit's series") {
  Rng rng(21);
  Eigen::MatrixXd x = rng.normal_matrix(5, 12);
  Eigen::MatrixXd lam(5, 1);
  lam << 0.1, 0.2, 3.0, 0.3, 0.1;  // unit 3 dominates
  SparseWeights w = hard_threshold_weights(lam, 1);
  Eigen::MatrixXd prox = proximate_factors(x, w);
  CHECK((prox.transpose() - x.row(2)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("noiseless panel with m = N spans the true factors") {
  Rng rng(22);
  Eigen::MatrixXd f = rng.normal_matrix(30, 2);
  Eigen::MatrixXd lam = rng.normal_matrix(10, 2);
  Eigen::MatrixXd x = lam * f.transpose();
  FactorFit fit = pca_fit(x, 2);
  SparseWeights w = hard_threshold_weights(fit.loadings, 10);
  Eigen::MatrixXd prox = proximate_factors(x, w);
  CHECK(generalized_correlation(prox, f).total == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("proximate factors match the least-squares oracle") {
  Rng rng(23);
  Eigen::MatrixXd x = rng.normal_matrix(6, 10);
  Eigen::MatrixXd lam = rng.normal_matrix(6, 2);
  SparseWeights w = hard_threshold_weights(lam, 3);
  Eigen::MatrixXd prox = proximate_factors(x, w);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd beta = oracles::ols_solve(w.weights, x.col(t));
    CHECK((prox.row(t).transpose() - beta).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("second-stage loadings recover PCA loadings from PCA factors") {
  Rng rng(24);
  Eigen::MatrixXd x = rng.normal_matrix(8, 14);
  FactorFit fit = pca_fit(x, 2);
  Eigen::MatrixXd lam = proximate_loadings(x, fit.factors);
  CHECK((lam - fit.loadings).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("second-stage loadings reconstruct a noiseless one-factor panel") {
  Rng rng(25);
  Eigen::MatrixXd f = rng.normal_matrix(20, 1);
  Eigen::MatrixXd lam = rng.normal_matrix(7, 1);
  Eigen::MatrixXd x = lam * f.transpose();
  // Any factor spanning f works, e.g. a scaled copy.
  Eigen::MatrixXd f_scaled = 2.5 * f;
  Eigen::MatrixXd lam2 = proximate_loadings(x, f_scaled);
  CHECK((lam2 * f_scaled.transpose() - x).cwiseAbs().maxCoeff() <=
        1e-8 * x.cwiseAbs().maxCoeff());
}

TEST_CASE("second-stage loadings match the normal-equations oracle") {
  Rng rng(26);
  Eigen::MatrixXd x = rng.normal_matrix(5, 18);
  Eigen::MatrixXd f = rng.normal_matrix(18, 2);
  Eigen::MatrixXd lam = proximate_loadings(x, f);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd beta = oracles::ols_solve(f, x.row(i).transpose());
    CHECK((lam.row(i).transpose() - beta).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("varimax leaves perfect simple structure alone") {
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(6, 2);
  lam(0, 0) = 2.0;
  lam(1, 0) = -1.5;
  lam(2, 0) = 1.0;
  lam(3, 1) = 1.8;
  lam(4, 1) = -2.2;
  lam(5, 1) = 0.7;
  VarimaxResult res = varimax_rotation(lam);
  CHECK(res.converged);
  CHECK((res.rotation - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("varimax matches the single-angle grid oracle for K = 2") {
  for (std::uint64_t seed : {30u, 31u, 32u}) {
    Rng rng(seed);
    Eigen::MatrixXd lam = rng.normal_matrix(40, 2);
    VarimaxResult res = varimax_rotation(lam);
    auto [best_angle, best_crit] = oracles::varimax_best_angle(lam);
    CHECK(res.criterion == doctest::Approx(best_crit).epsilon(1e-9));
    // The K=2 rotation is a rotation by some angle; compare modulo the
    // criterion's pi/2 symmetry.
    const double angle = std::atan2(res.rotation(1, 0), res.rotation(0, 0));
    const double period = std::numbers::pi / 2.0;
    double diff = std::fmod(std::abs(angle - best_angle), period);
    diff = std::min(diff, period - diff);
    CHECK(diff <= 1e-6);
  }
}

TEST_CASE("varimax requires at least two columns") {
  Eigen::MatrixXd lam(4, 1);
  lam << 1, 2, 3, 4;
  CHECK_THROWS_AS(varimax_rotation(lam), InputError);
}

TEST_CASE("varimax rotations are orthonormal and never lower the criterion") {
  Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd lam = rng.normal_matrix(25, 3);
    VarimaxResult res = varimax_rotation(lam);
    CHECK((res.rotation.transpose() * res.rotation - Eigen::MatrixXd::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
    CHECK(res.criterion >= varimax_criterion(lam) - 1e-12);
    CHECK(res.criterion == doctest::Approx(varimax_criterion(lam * res.rotation)).epsilon(1e-10));
  }
}

namespace {

FactorFit fit_for_rotation_tests(std::uint64_t seed, int n = 30, int t = 60, int k = 2) {
  SimConfig cfg;
  cfg.n = n;
  cfg.t = t;
  cfg.k = k;
  cfg.sigma_f.assign(static_cast<std::size_t>(k), 1.0);
  for (int j = 0; j < k; ++j) cfg.sigma_f[static_cast<std::size_t>(j)] = 1.5 - 0.2 * j;
  cfg.errors = ErrorModel::iid(0.1);
  cfg.seed = seed;
  cfg.reps = 1;
  SimDraw draw = gen_factor_panel(cfg, 0);
  return pca_fit(draw.x, k);
}

}  // namespace

TEST_CASE("rotate-threshold with P = I and a slack c matches plain thresholding") {
  FactorFit fit = fit_for_rotation_tests(40);
  // Build a fixture whose cross-column ratios stay below c on the top rows:
  // strong two-block loadings.
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(10, 2);
  for (int i = 0; i < 5; ++i) {
    lam(i, 0) = 5.0 + i;
    lam(i, 1) = 0.2;
    lam(5 + i, 1) = 5.0 + i;
    lam(5 + i, 0) = 0.2;
  }
  FactorFit block = fit;
  block.loadings = lam;
  block.eigenvalues = Eigen::Vector2d(2.0, 1.0);

  RotationSpec spec;
  spec.variant = RotationVariant::none;
  spec.c = 0.3;  // above every observed ratio (~0.04), below the cap 0.3535

  SparseWeights rotated = rotate_threshold_weights(block, spec, 3, /*signal_weighted=*/true);
  SparseWeights plain = hard_threshold_weights(block.loadings, 3);
  CHECK((rotated.mask - plain.mask).cwiseAbs().maxCoeff() == 0);
  CHECK((rotated.weights - plain.weights).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("tiny c selects only structurally exclusive rows") {
  FactorFit fit = fit_for_rotation_tests(41);
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(6, 2);
  lam(0, 0) = 3.0;
  lam(1, 0) = 2.0;
  lam(2, 0) = 1.0;
  lam(3, 1) = 3.0;
  lam(4, 1) = 2.0;
  lam(5, 1) = 1.0;
  FactorFit block = fit;
  block.loadings = lam;
  block.eigenvalues = Eigen::Vector2d(2.0, 1.0);

  RotationSpec spec;
  spec.variant = RotationVariant::none;
  spec.c = 1e-6;
  SparseWeights w = rotate_threshold_weights(block, spec, 3);
  CHECK(w.mask.col(0).sum() == 3);
  CHECK(w.mask(0, 0) == 1);
  CHECK(w.mask(3, 1) == 1);

  // A row with any overlap is excluded under tiny c; demand m = 4 and fail.
  CHECK_THROWS_AS(rotate_threshold_weights(block, spec, 4), InputError);
}

TEST_CASE("eligible rows match a brute-force eligibility scan") {
  FactorFit fit = fit_for_rotation_tests(42, 40, 80, 2);
  RotationSpec spec;
  spec.variant = RotationVariant::none;
  spec.c = 0.25;
  const int m = 4;

  const Eigen::MatrixXd v = fit.loadings * fit.eigenvalues.cwiseSqrt().asDiagonal();
  SparseWeights w = rotate_threshold_weights(fit, spec, m);
  for (int j = 0; j < 2; ++j) {
    // Oracle: exhaustive scan for eligibility, then the m largest.
    std::vector<std::pair<double, int>> elig;
    for (int i = 0; i < v.rows(); ++i) {
      const double vij = std::abs(v(i, j));
      if (vij == 0.0) continue;
      bool ok = true;
      for (int k = 0; k < 2; ++k)
        if (k != j && !(std::abs(v(i, k)) < spec.c * vij)) ok = false;
      if (ok) elig.emplace_back(-vij, i);
    }
    REQUIRE(static_cast<int>(elig.size()) >= m);
    std::stable_sort(elig.begin(), elig.end(),
                     [](auto a, auto b) { return a.first < b.first; });
    for (int r = 0; r < m; ++r) CHECK(w.mask(elig[static_cast<std::size_t>(r)].second, j) == 1);
  }
}

TEST_CASE("practical rotate-threshold leaves the generalized correlation unchanged") {
  FactorFit fit = fit_for_rotation_tests(43, 40, 80, 2);
  SimConfig cfg;
  cfg.n = 40;
  cfg.t = 80;
  cfg.k = 2;
  cfg.sigma_f = {1.5, 1.3};
  cfg.errors = ErrorModel::iid(0.1);
  cfg.seed = 43;  // same draw as fit_for_rotation_tests
  SimDraw draw = gen_factor_panel(cfg, 0);

  RotationSpec spec;
  spec.variant = RotationVariant::varimax;
  spec.c = 0.2;
  SparseWeights plain = hard_threshold_weights(fit.loadings, 5);
  SparseWeights practical = rotate_threshold_weights(fit, spec, 5, true, /*practical=*/true);

  Eigen::MatrixXd f_plain = proximate_factors(draw.x, plain);
  Eigen::MatrixXd f_rot = proximate_factors(draw.x, practical);
  // Post-multiplying the weights by an invertible matrix mixes the factors
  // without moving their span.
  CHECK(generalized_correlation(f_plain, f_rot).total == doctest::Approx(2.0).epsilon(1e-8));
  for (int j = 0; j < 2; ++j)
    CHECK(practical.weights.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("supplied rotations must be orthonormal") {
  FactorFit fit = fit_for_rotation_tests(44);
  RotationSpec spec;
  spec.variant = RotationVariant::supplied;
  spec.c = 0.2;
  spec.P = Eigen::MatrixXd::Ones(2, 2);
  CHECK_THROWS_AS(rotate_threshold_weights(fit, spec, 3), InputError);
}

TEST_CASE("weight invariants: counts, norms and scale invariance") {
  Rng rng(45);
  Eigen::MatrixXd x = rng.normal_matrix(20, 35);
  FactorFit fit = pca_fit(x, 2);
  for (int m : {1, 3, 7, 20}) {
    SparseWeights w = hard_threshold_weights(fit.loadings, m);
    for (int j = 0; j < 2; ++j) {
      CHECK(w.mask.col(j).sum() == m);
      CHECK(w.weights.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  // Scaling the panel leaves the mask and the correlations unchanged.
  FactorFit fit_scaled = pca_fit(Eigen::MatrixXd(4.0 * x), 2);
  SparseWeights w1 = hard_threshold_weights(fit.loadings, 5);
  SparseWeights w2 = hard_threshold_weights(fit_scaled.loadings, 5);
  CHECK((w1.mask - w2.mask).cwiseAbs().maxCoeff() == 0);
  const double g1 = generalized_correlation(proximate_factors(x, w1), fit.factors).total;
  const double g2 =
      generalized_correlation(proximate_factors(Eigen::MatrixXd(4.0 * x), w2),
                              fit_scaled.factors)
          .total;
  CHECK(g1 == doctest::Approx(g2).epsilon(1e-8));
}

TEST_CASE("m = N proximate factors span the PCA factors") {
  Rng rng(46);
  Eigen::MatrixXd x = rng.normal_matrix(12, 25);
  FactorFit fit = pca_fit(x, 3);
  SparseWeights w = hard_threshold_weights(fit.loadings, 12);
  Eigen::MatrixXd prox = proximate_factors(x, w);
  CHECK(generalized_correlation(prox, fit.factors).total == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("choose_m_data_driven endpoints and oracle scan") {
  Rng rng(47);

  SUBCASE("target zero returns m = 1") {
    Eigen::MatrixXd x = rng.normal_matrix(10, 20);
    Panel panel;
    panel.values = x;
    for (int i = 0; i < 10; ++i) panel.unit_ids.push_back("u" + std::to_string(i));
    for (int j = 0; j < 20; ++j) panel.time_ids.push_back("t" + std::to_string(j));
    CHECK(choose_m_data_driven(panel, 2, 0.0) == 1);
  }

  SUBCASE("noiseless panels need only a handful of units") {
    SimConfig cfg;
    cfg.n = 20;
    cfg.t = 40;
    cfg.k = 2;
    cfg.sigma_f = {1.2, 1.0};
    cfg.errors = ErrorModel::iid(1e-8);
    SimDraw draw = gen_factor_panel(cfg, 0);
    const int m = choose_m_data_driven(draw.to_panel(), 2, 0.99);
    CHECK(m <= 2);
  }

  SUBCASE("matches an exhaustive scan and the bisection variant on a monotone profile") {
    SimConfig cfg;
    cfg.n = 25;
    cfg.t = 60;
    cfg.k = 2;
    cfg.sigma_f = {1.4, 1.1};
    cfg.errors = ErrorModel::iid(1.0);
    SimDraw draw = gen_factor_panel(cfg, 1);
    Panel panel = draw.to_panel();
    const double target = 0.9;
    const int chosen = choose_m_data_driven(panel, 2, target);

    // Oracle: full scan over m.
    FactorFit fit = pca_fit(panel, 2);
    int expected = 25;
    for (int m = 1; m <= 25; ++m) {
      SparseWeights w = hard_threshold_weights(fit.loadings, m);
      const double rho =
          generalized_correlation(fit.factors, proximate_factors(panel.values, w)).total / 2.0;
      if (rho >= target) {
        expected = m;
        break;
      }
    }
    CHECK(chosen == expected);
  }
}

TEST_CASE("choose_m_theory tracks the evaluated bound curve") {
  TheoryBoundConfig cfg;
  cfg.n = 100;
  cfg.k = 1;
  cfg.specs = {gev_spec_for_family(TailFamily::folded_normal)};
  cfg.signals = {1.0};
  cfg.sigma_e = 1.0;

  SUBCASE("zero target probability returns m = 1") {
    CHECK(choose_m_theory(cfg, 0.0, 0.95) == 1);
  }

  SUBCASE("folded-normal design: smallest m whose bound clears the target") {
    const int chosen = choose_m_theory(cfg, 0.9, 0.95);
    // Oracle: direct evaluation of the one-factor curve without bisection.
    auto [a_n, b_n] = norming_constants(TailFamily::folded_normal, 100);
    int expected = -1;
    for (int m = 1; m <= 100 && expected < 0; ++m) {
      const double u_star = std::sqrt(0.95 / (0.05 * m));  // rho0/(1-rho0)/m, sigma=1
      const double tau = std::exp(-(u_star - b_n) / a_n);
      if (1.0 - g1m_independent(tau, m) >= 0.9) expected = m;
    }
    CHECK(chosen == expected);
    CHECK(chosen >= 4);
    CHECK(chosen <= 10);
  }

  SUBCASE("bounded support below the threshold is unattainable") {
    TheoryBoundConfig uni = cfg;
    uni.specs = {gev_spec_for_family(TailFamily::uniform)};
    // Uniform(0,1) magnitudes can never reach the required threshold.
    CHECK_THROWS_AS(choose_m_theory(uni, 0.9, 0.99), InputError);
  }
}

TEST_CASE("composition report counts nonzeros per group and factor") {
  Rng rng(48);
  Panel panel;
  panel.values = rng.normal_matrix(6, 12);
  panel.unit_ids = {"a1", "a2", "a3", "b1", "b2", "b3"};
  for (int j = 0; j < 12; ++j) panel.time_ids.push_back("t" + std::to_string(j));
  panel.group_of_unit = std::map<std::string, std::string>{
      {"a1", "A"}, {"a2", "A"}, {"a3", "A"}, {"b1", "B"}, {"b2", "B"}, {"b3", "B"}};

  FactorFit fit = pca_fit(panel, 2);
  SparseWeights w = hard_threshold_weights(fit.loadings, 3);
  Table report = composition_report(panel, w);
  REQUIRE(report.n_rows() == 2);
  double total = 0.0;
  for (std::size_t r = 0; r < report.n_rows(); ++r)
    total += report.row(r)[0] + report.row(r)[1];
  CHECK(total == doctest::Approx(6.0));  // m * K nonzeros overall
}
