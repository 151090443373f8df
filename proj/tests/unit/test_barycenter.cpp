#include <catch_amalgamated.hpp>

#include <cmath>

#include "ermc/transport.hpp"

using namespace ermc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

// Reference minimizer from tests/oracles/barycenter_oracle.py (cvxpy, Clarabel).

namespace {

const double kOraclePhi[16] = {0.053828345161753485, 0.05972461210132216, 0.06610911914432478, 0.07092473164943208,
                               0.07520464113286794,  0.07728939066532578, 0.07850652175471622, 0.07881378704995774,
                               0.07668791958207219,  0.0723235964074783,  0.06688839226518767, 0.059958367329793094,
                               0.05168734351143047,  0.04455727518226668, 0.037228996900048945, 0.03026696015610224};
const double kOracleObjective = 0.04538083919212235;

struct OracleCase {
  Grid grid = Grid::uniform_1d(16);
  std::vector<Eigen::VectorXd> measures;
  std::vector<double> weights{0.5, 0.3, 0.2};
  double lambda = 0.1;
  OracleCase() {
    const auto& x = grid.axes()[0];
    measures.assign(3, Eigen::VectorXd(16));
    for (int j = 0; j < 16; ++j) {
      measures[0](j) = std::exp(-std::pow(x[j] - 0.2, 2) / (2 * 0.05 * 0.05));
      measures[1](j) = std::exp(-std::pow(x[j] - 0.7, 2) / (2 * 0.1 * 0.1));
      measures[2](j) = 1 + x[j];
    }
    for (auto& m : measures) m /= m.sum();
  }
  double objective(const TransportTerm& t, const Eigen::VectorXd& phi) const {
    return t.value(phi) + lambda * negative_entropy(phi, grid);
  }
};

Eigen::VectorXd oracle_phi() { return Eigen::Map<const Eigen::VectorXd>(kOraclePhi, 16); }

}  // namespace

TEST_CASE("quantile and LP transport terms agree in value") {
  const OracleCase c;
  const auto exact = make_transport_term(c.grid, c.measures, c.weights, TransportRoute::Exact);
  const auto quantile = make_transport_term(c.grid, c.measures, c.weights, TransportRoute::Quantile);
  Rng rng(2);
  for (int k = 0; k < 25; ++k) {
    const Eigen::VectorXd phi = random_dirichlet(16, 0.8, rng);
    CHECK_THAT(quantile->value(phi), WithinAbs(exact->value(phi), 1e-13));
  }
  const Eigen::VectorXd ref = oracle_phi() / oracle_phi().sum();
  CHECK_THAT(quantile->value(ref), WithinAbs(exact->value(ref), 1e-13));
}

TEST_CASE("quantile term needs a 1-D grid") {
  const auto g = Grid::uniform_2d(2, 2);
  const std::vector<Eigen::VectorXd> m{Eigen::VectorXd::Constant(4, 0.25)};
  CHECK_THROWS_AS(QuantileTransportTerm(g, m, {1.0}), std::invalid_argument);
  CHECK_NOTHROW(make_transport_term(g, m, {1.0}, TransportRoute::Auto));
}

TEST_CASE("transport gradients are subgradients") {
  const OracleCase c;
  Rng rng(4);
  for (auto route : {TransportRoute::Exact, TransportRoute::Quantile}) {
    const auto term = make_transport_term(c.grid, c.measures, c.weights, route);
    for (int k = 0; k < 25; ++k) {
      const Eigen::VectorXd phi = random_dirichlet(16, 1.0, rng), psi = random_dirichlet(16, 1.0, rng);
      const Eigen::VectorXd g = term->gradient(phi);
      CHECK(term->value(psi) >= term->value(phi) + g.dot(psi - phi) - 1e-12);
    }
  }
}

TEST_CASE("entropic barycenter matches the convex solver oracle") {
  const OracleCase c;
  const auto r = entropic_barycenter_solve(c.measures, c.weights, c.lambda, c.grid);
  CHECK((r.weights - oracle_phi()).lpNorm<1>() < 1e-7);
  CHECK_THAT(r.objective, WithinAbs(kOracleObjective, 1e-9));
  CHECK_THAT(r.weights.sum(), WithinAbs(1.0, 1e-14));
  // no better point among small perturbations
  const auto term = make_transport_term(c.grid, c.measures, c.weights, TransportRoute::Quantile);
  Rng rng(8);
  for (int k = 0; k < 50; ++k) {
    const double s = rng.uniform(1e-4, 0.2);
    const Eigen::VectorXd phi = (1 - s) * r.weights + s * random_dirichlet(16, 1.0, rng);
    CHECK(c.objective(*term, phi) >= r.objective - 1e-15);
  }
}

TEST_CASE("mirror descent on the LP route approaches the same minimizer") {
  const OracleCase c;
  BarycenterOptions o;
  o.route = TransportRoute::Exact;
  const auto r = entropic_barycenter_solve(c.measures, c.weights, c.lambda, c.grid, o);
  CHECK(r.objective >= kOracleObjective - 1e-9);
  CHECK_THAT(r.objective, WithinAbs(kOracleObjective, 1e-7));
  CHECK((r.weights - oracle_phi()).lpNorm<1>() < 1e-3);
}

TEST_CASE("uniform data has the uniform barycenter") {
  const auto g = Grid::uniform_1d(20);
  const std::vector<Eigen::VectorXd> m{Eigen::VectorXd::Constant(20, 0.05)};
  for (double lambda : {1e-3, 0.1, 10.0}) {
    const auto r = entropic_barycenter_solve(m, {1.0}, lambda, g);
    CHECK((r.weights - m[0]).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK_THAT(r.objective, WithinAbs(0.0, 1e-14));
  }
}

TEST_CASE("mirrored data gives a mirrored barycenter") {
  const auto g = Grid::uniform_1d(31);
  Rng rng(12);
  const Eigen::VectorXd a = random_dirichlet(31, 1.0, rng);
  const std::vector<Eigen::VectorXd> m{a, a.reverse()};
  const auto r = entropic_barycenter_solve(m, {0.5, 0.5}, 0.05, g);
  CHECK((r.weights - r.weights.reverse()).lpNorm<1>() < 1e-10);
}

TEST_CASE("pinned boundaries: point masses far apart") {
  // the mean quantile has one big jump; small lambda pins a boundary on it
  const auto g = Grid::uniform_1d(12);
  Eigen::VectorXd left = Eigen::VectorXd::Zero(12), right = Eigen::VectorXd::Zero(12);
  left(1) = 1.0;
  right(10) = 1.0;
  const std::vector<Eigen::VectorXd> m{left, right};
  const auto term = make_transport_term(g, m, {0.5, 0.5}, TransportRoute::Quantile);
  for (double lambda : {1e-3, 1e-2, 1.0}) {
    const auto r = entropic_barycenter_solve(*term, lambda, g);
    Rng rng(21);
    for (int k = 0; k < 100; ++k) {
      const double s = std::pow(10.0, rng.uniform(-6, -0.5));
      const Eigen::VectorXd phi = (1 - s) * r.weights + s * random_dirichlet(12, 1.0, rng);
      CHECK(term->value(phi) + lambda * negative_entropy(phi, g) >= r.objective - 1e-14);
    }
  }
}

TEST_CASE("entropic growth: Pinsker modulus holds, modulus 2 does not") {
  const EntropicBarycenterProblem prob{EntropicConfig{}};
  Rng rng(7);
  const auto batch = prob.sample(rng, 50);
  std::vector<double> w(batch.n(), 1.0 / static_cast<double>(batch.n()));
  const auto term = make_transport_term(prob.grid(), batch.samples, w, TransportRoute::Auto);
  const double lambda = prob.config().lambda;
  const auto sol = entropic_barycenter_solve(*term, lambda, prob.grid(), prob.solver_options());
  const auto pinsker =
      verify_entropic_strong_convexity(*term, lambda, prob.grid(), sol.weights, 1e-12, 100, lambda / 2.0, rng);
  CHECK(pinsker.pass);
  CHECK(pinsker.checked == 100);
  // 2 |phi - phi_hat|_1^2 exceeds the objective gap near the minimizer
  const auto two = verify_entropic_strong_convexity(*term, lambda, prob.grid(), sol.weights, 1e-12, 100, 2.0, rng);
  CHECK_FALSE(two.pass);
  CHECK(two.max_violation > 0.1);
}

TEST_CASE("entropic problem constants") {
  const EntropicBarycenterProblem prob{EntropicConfig{}};
  CHECK_THAT(prob.grid().diameter(), WithinRel(0.984375, 1e-15));
  const auto p = prob.params();
  CHECK(p.beta == 2.0);
  CHECK(p.alpha == 1.0);
  CHECK(p.tau == 2.0);
  CHECK_THAT(p.psi1_a, WithinRel(3.8759765625, 1e-15));
  CHECK(prob.pool().size() == 32);
  CHECK_THAT(prob.population_barycenter().sum(), WithinAbs(1.0, 1e-14));
  CHECK(prob.population_barycenter().minCoeff() > 0.0);
}

TEST_CASE("entropic empirical solve") {
  const EntropicBarycenterProblem prob{EntropicConfig{}};
  SampleBatch all;
  all.samples = prob.pool();
  CHECK((prob.solve_empirical(all)[0] - prob.population_barycenter()).lpNorm<1>() < 1e-12);

  // repeated draws act as one measure with a larger weight
  SampleBatch rep;
  rep.samples = {prob.pool()[0], prob.pool()[3], prob.pool()[0]};
  const std::vector<Eigen::VectorXd> m{prob.pool()[0], prob.pool()[3]};
  const auto direct = entropic_barycenter_solve(m, {2.0 / 3.0, 1.0 / 3.0}, prob.config().lambda, prob.grid());
  CHECK((prob.solve_empirical(rep)[0] - direct.weights).lpNorm<1>() < 1e-13);

  CHECK_THROWS_AS(prob.solve_empirical(SampleBatch{}), std::invalid_argument);
  CHECK_THROWS_AS(EntropicBarycenterProblem(EntropicConfig{.nodes = 1}), std::invalid_argument);
  CHECK_THROWS_AS(EntropicBarycenterProblem(EntropicConfig{.lambda = 0.0}), std::invalid_argument);
}
