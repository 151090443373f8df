#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ermc/errors.hpp"
#include "ermc/problems.hpp"

using namespace ermc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

// Reference constants come from tests/oracles/orlicz_oracle.py and
// tests/oracles/problems_oracle.py.

namespace {

EuclideanConfig diag_gaussian() {
  EuclideanConfig c;
  c.scale = (Eigen::VectorXd(2) << 1.0, 0.5).finished();
  return c;
}

}  // namespace

// ---------------------------------------------------------------- Euclidean

TEST_CASE("Euclidean barycenter is the sample mean") {
  SampleBatch b;
  b.samples = {(Point(2) << 1, 2).finished(), (Point(2) << 3, -2).finished(), (Point(2) << 2, 3).finished()};
  CHECK(frechet_mean_euclidean(b).isApprox((Point(2) << 2, 1).finished(), 1e-15));
}

TEST_CASE("Euclidean problem constants") {
  const EuclideanBarycenterProblem prob(diag_gaussian());
  CHECK_THAT(prob.trace_cov(), WithinRel(1.25, 1e-15));
  // |X - X'| for Sigma = diag(1, 0.25); empirical calibration with 1e6 draws
  CHECK_THAT(prob.rho_psi1().value, WithinRel(2.2041672971768794, 0.01));
  const auto p = prob.params();
  CHECK(p.beta == 2.0);
  CHECK(p.alpha == 1.0);
  CHECK(p.tau == 1.0);
  CHECK(p.psi1_a == 2.0 * prob.rho_psi1().value);
  CHECK(p.p_n_raw(10) == 0.0);
}

TEST_CASE("Euclidean trace of the covariance by family") {
  EuclideanConfig c = diag_gaussian();
  c.calibration_draws = 1000;
  c.family = EuclideanFamily::Uniform;
  CHECK_THAT(EuclideanBarycenterProblem(c).trace_cov(), WithinRel(1.25 / 3.0, 1e-15));
  c.family = EuclideanFamily::Laplace;
  CHECK_THAT(EuclideanBarycenterProblem(c).trace_cov(), WithinRel(2.5, 1e-15));
  for (auto f : {EuclideanFamily::Gaussian, EuclideanFamily::Uniform, EuclideanFamily::Laplace})
    CHECK(parse_euclidean_family(to_string(f)) == f);
  REQUIRE_THROWS_AS(parse_euclidean_family("cauchy"), std::invalid_argument);
}

TEST_CASE("Euclidean assumption suites") {
  const EuclideanBarycenterProblem prob(diag_gaussian());
  Rng rng(RngSpec{10, 0});
  const auto quad = verify_quadruple_inequality(prob, 20000, rng);
  CHECK(quad.pass);
  // bias-variance: J(phi) - J* = |phi - phi*|^2 exactly
  const auto var = verify_variance_inequality(prob, 5000, rng, 1e-12);
  CHECK(var.pass);
  CHECK(std::abs(var.max_violation) <= 1e-12);
}

TEST_CASE("halving a makes the Euclidean quadruple check fail") {
  EuclideanConfig c = diag_gaussian();
  c.a_scale = 0.5;
  c.calibration_draws = 1000;
  const EuclideanBarycenterProblem prob(c);
  Rng rng(RngSpec{10, 1});
  const auto quad = verify_quadruple_inequality(prob, 20000, rng);
  CHECK_FALSE(quad.pass);
  CHECK(quad.max_violation > 0.0);
}

// -------------------------------------------------------------- spider tree

TEST_CASE("spider distance") {
  CHECK(spider_distance(spider_point(1, 0.3), spider_point(1, 0.8)) == 0.5);
  CHECK(spider_distance(spider_point(1, 0.3), spider_point(2, 0.8)) == 1.1);
  // the origin belongs to every leg
  CHECK(spider_point(2, 0.0) == spider_point(0, 0.0));
  CHECK(spider_distance(spider_point(2, 0.0), spider_point(1, 0.4)) == 0.4);
  Rng rng(RngSpec{11, 0});
  for (int i = 0; i < 1000; ++i) {
    auto p = [&] { return spider_point(static_cast<int>(rng.index(3)), rng.uniform()); };
    const auto a = p(), b = p(), c = p();
    CHECK(spider_distance(a, c) <= spider_distance(a, b) + spider_distance(b, c) + 1e-15);
  }
}

TEST_CASE("spider Frechet mean matches a grid search") {
  const SpiderTreeBarycenterProblem prob(SpiderConfig{});
  Rng rng(RngSpec{11, 1});
  for (int trial = 0; trial < 20; ++trial) {
    const auto batch = prob.sample(rng, 15);
    const auto mean = frechet_mean_spider(batch, 3);
    const double best = spider_frechet_objective(batch, mean);
    for (int leg = 0; leg < 3; ++leg)
      for (int k = 0; k <= 2000; ++k)
        CHECK(best <= spider_frechet_objective(batch, spider_point(leg, k / 2000.0)) + 1e-14);
  }
}

TEST_CASE("spider population constants") {
  const SpiderTreeBarycenterProblem prob(SpiderConfig{});
  CHECK(prob.population_mean()(0) == 0.0);
  CHECK_THAT(prob.population_mean()(1), WithinRel(0.1, 1e-12));
  CHECK_THAT(prob.rho_psi1().value, WithinRel(1.166973105352524, 0.01));
  Rng rng(RngSpec{11, 2});
  CHECK(verify_quadruple_inequality(prob, 20000, rng).pass);
  CHECK(verify_variance_inequality(prob, 5000, rng).pass);
}

// ------------------------------------------------------------- eigenvector

TEST_CASE("eigenvector constants") {
  const EigenvectorProblem prob(EigenvectorConfig{});
  const auto p = prob.params();
  CHECK_THAT(p.tau, WithinRel(0.4052847345693511, 1e-14));
  CHECK_THAT(prob.psi2_y(), WithinRel(2.309401076758503, 1e-14));
  CHECK_THAT(p.psi1_a, WithinRel(213.33333333333331, 1e-14));
  CHECK_THAT(prob.kappa_rate(), WithinRel(5.926910172837799e-06, 1e-12));
  CHECK_THAT(p.diam_s, WithinRel(std::numbers::pi, 1e-15));
  CHECK_THAT(p.kappa(100), WithinRel(5.0 * std::exp(-100 * 5.926910172837799e-06), 1e-12));
}

TEST_CASE("eigenvector population side") {
  const EigenvectorProblem prob(EigenvectorConfig{});
  const auto& cov = prob.covariance();
  CHECK((cov - cov.transpose()).norm() < 1e-14);
  CHECK_THAT(prob.u1().dot(cov * prob.u1()), WithinRel(2.0, 1e-12));
  CHECK_THAT(prob.u1().norm(), WithinRel(1.0, 1e-14));
  CHECK(canonical_sign(-prob.u1()) == prob.u1());
  CHECK(prob.true_minimizers().size() == 2);
  CHECK(top_eigenvector(cov).isApprox(prob.u1(), 1e-12));
}

TEST_CASE("sphere distance") {
  const Point e1 = Eigen::VectorXd::Unit(3, 0), e2 = Eigen::VectorXd::Unit(3, 1);
  CHECK_THAT(sphere_distance(e1, e2), WithinRel(std::numbers::pi / 2, 1e-15));
  CHECK_THAT(sphere_distance(e1, -e1), WithinRel(std::numbers::pi, 1e-15));
  REQUIRE_THROWS_AS(sphere_distance(2.0 * e1, e2), std::invalid_argument);
}

TEST_CASE("eigenvector assumption suites") {
  const EigenvectorProblem prob(EigenvectorConfig{});
  Rng rng(RngSpec{12, 0});
  CHECK(verify_quadruple_inequality(prob, 20000, rng).pass);
  CHECK(verify_variance_inequality(prob, 5000, rng).pass);
  CHECK(verify_eigengap_lemma(prob.covariance(), 5000, rng).pass);
}

TEST_CASE("Davis-Kahan bounds the empirical eigenvector error") {
  const EigenvectorProblem prob(EigenvectorConfig{});
  Rng rng(RngSpec{12, 1});
  for (int trial = 0; trial < 50; ++trial) {
    const auto batch = prob.sample(rng, 200);
    const Eigen::MatrixXd emp = empirical_covariance(batch);
    const Eigen::VectorXd u = top_eigenvector_empirical(batch);
    const double sin_angle = std::sqrt(std::max(0.0, 1.0 - std::pow(u.dot(prob.u1()), 2)));
    CHECK(sin_angle <= davis_kahan_bound(prob.covariance(), emp));
  }
}

// ------------------------------------------------------------------- LASSO

TEST_CASE("prox-gradient with identity design soft-thresholds") {
  const Eigen::MatrixXd G = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd c = (Eigen::VectorXd(3) << 1.0, -0.05, -0.4).finished();
  const auto sol = lasso_prox_gradient(G, c, 1.0, 0.1, 1e-12);
  CHECK_THAT(sol.phi(0), WithinAbs(0.9, 1e-12));
  CHECK(sol.phi(1) == 0.0);
  CHECK_THAT(sol.phi(2), WithinAbs(-0.3, 1e-12));
}

TEST_CASE("population LASSO minimizer satisfies the KKT conditions") {
  const LassoProblem prob(LassoConfig{});
  const Eigen::VectorXd grad = prob.feature_cov() * prob.phi_star() - prob.feature_cov() * LassoConfig{}.phi0;
  const double lambda = LassoConfig{}.lambda;
  for (Eigen::Index j = 0; j < grad.size(); ++j) {
    const double phi = prob.phi_star()(j);
    if (phi != 0.0) CHECK_THAT(grad(j) + lambda * std::copysign(1.0, phi), WithinAbs(0.0, 1e-5));
    else CHECK(std::abs(grad(j)) <= lambda + 1e-5);
  }
}

TEST_CASE("LASSO constants") {
  const LassoProblem prob(LassoConfig{});
  CHECK_FALSE(prob.tau_estimated());
  CHECK(prob.hoffman() >= 1.0);
  const auto p = prob.params();
  CHECK(p.tau > 0.0);
  CHECK(p.tau == prob.growth_constant());
  // E V^2 = phi0' C phi0 + sigma^2 with unit variances and correlation 0.3
  const double ev2 = 1.0 + 0.25 - 2 * 0.5 * 0.3 + 0.25;
  CHECK_THAT(prob.ev2(), WithinRel(ev2, 1e-14));
  CHECK_THAT(p.j0, WithinRel(ev2 / 0.1, 1e-14));
  CHECK(p.eta == p.iota);
  CHECK(p.eta(1e4) < 1e-30);
  // the Hoffman constant enters the kappa exponent squared: pre-asymptotic far out
  CHECK(prob.hoffman() > 10.0);
  CHECK(p.kappa(1e6) > 0.75);
  CHECK(p.kappa(1e10) < p.kappa(1e6));
}

TEST_CASE("LASSO assumption suites") {
  const LassoProblem prob(LassoConfig{});
  Rng rng(RngSpec{13, 0});
  CHECK(verify_quadruple_inequality(prob, 20000, rng).pass);
  CHECK(verify_variance_inequality(prob, 5000, rng).pass);
  // the constant used in the bound sits below the empirical growth
  Rng est(RngSpec{13, 1});
  CHECK(prob.growth_constant() <= estimate_lojasiewicz_constant(prob, 5000, est));
}

TEST_CASE("LASSO with m > 4 falls back to an estimated tau") {
  LassoConfig c;
  c.phi0 = (Eigen::VectorXd(5) << 1.0, -0.5, 0.0, 0.25, 0.0).finished();
  const LassoProblem prob(c);
  CHECK(prob.tau_estimated());
  CHECK(prob.growth_constant() > 0.0);
}

TEST_CASE("LASSO solver reports non-convergence") {
  const Eigen::MatrixXd G = (Eigen::MatrixXd(2, 2) << 1.0, 0.99, 0.99, 1.0).finished();
  const Eigen::VectorXd c = (Eigen::VectorXd(2) << 1.0, 0.5).finished();
  REQUIRE_THROWS_AS(lasso_prox_gradient(G, c, 1.0, 0.01, 1e-15, 5), ConvergenceError);
}
