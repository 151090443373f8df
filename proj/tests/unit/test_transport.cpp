#include <catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "ermc/transport.hpp"

using namespace ermc;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

// LP reference from tests/oracles/problems_oracle.py (scipy HiGHS).

namespace {

struct LpCase {
  Eigen::VectorXd a = (Eigen::VectorXd(4) << 0.1, 0.4, 0.3, 0.2).finished();
  Eigen::VectorXd b = (Eigen::VectorXd(5) << 0.25, 0.15, 0.2, 0.3, 0.1).finished();
  Eigen::MatrixXd cost;
  LpCase() {
    const double x[] = {0.0, 0.3, 0.5, 0.9}, y[] = {0.1, 0.2, 0.6, 0.7, 1.0};
    cost.resize(4, 5);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 5; ++j) cost(i, j) = (x[i] - y[j]) * (x[i] - y[j]);
  }
};

// North-west corner rule on sorted supports: the monotone coupling, optimal in 1-D.
double monotone_w2(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::vector<double>& x) {
  Eigen::VectorXd ra = a, rb = b;
  double total = 0.0;
  Eigen::Index i = 0, j = 0;
  while (i < ra.size() && j < rb.size()) {
    const double m = std::min(ra(i), rb(j));
    total += m * (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]) *
             (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]);
    ra(i) -= m;
    rb(j) -= m;
    if (ra(i) <= 1e-15) ++i;
    if (j < rb.size() && rb(j) <= 1e-15) ++j;
  }
  return total;
}

}  // namespace

TEST_CASE("uniform grids are cell centred") {
  const auto g = Grid::uniform_1d(4);
  CHECK(g.dimension() == 1);
  CHECK(g.size() == 4);
  CHECK_THAT(g.cell_volume(), WithinRel(0.25, 1e-15));
  CHECK_THAT(g.axes()[0][0], WithinAbs(0.125, 1e-15));
  CHECK_THAT(g.diameter(), WithinRel(0.75, 1e-15));
  CHECK_THAT(g.domain_volume(), WithinRel(1.0, 1e-15));

  const auto g2 = Grid::uniform_2d(3, 2);
  CHECK(g2.size() == 6);
  CHECK(g2.dimension() == 2);
  const Eigen::MatrixXd d = g2.squared_distances();
  CHECK(d.rows() == 6);
  CHECK_THAT(d.maxCoeff(), WithinRel(g2.diameter() * g2.diameter(), 1e-14));
  CHECK(d.diagonal().isZero());

  CHECK_THROWS_AS(Grid::uniform_1d(0), std::invalid_argument);
  CHECK_THROWS_AS(Grid::uniform_1d(3, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("densities validate their weights") {
  auto g = std::make_shared<const Grid>(Grid::uniform_1d(3));
  CHECK_NOTHROW(DiscreteDensity::make(g, Eigen::Vector3d(0.2, 0.3, 0.5)));
  CHECK_THROWS_WITH(DiscreteDensity::make(g, Eigen::Vector2d(0.5, 0.5)), ContainsSubstring("size"));
  CHECK_THROWS_WITH(DiscreteDensity::make(g, Eigen::Vector3d(0.2, 0.3, 0.6)), ContainsSubstring("sum to 1"));
  CHECK_THROWS_WITH(DiscreteDensity::make(g, Eigen::Vector3d(-0.1, 0.6, 0.5)), ContainsSubstring(">= 0"));
  const auto d = DiscreteDensity::make(g, Eigen::Vector3d(0.2, 0.3, 0.5));
  CHECK_THAT(d.density(2), WithinRel(1.5, 1e-15));
}

TEST_CASE("transport simplex matches the LP oracle") {
  const LpCase lp;
  const auto plan = transport_lp(lp.a, lp.b, lp.cost);
  CHECK_THAT(plan.cost, WithinAbs(0.03149999999999999, 1e-14));
  CHECK_THAT(plan.dual_value, WithinAbs(plan.cost, 1e-14));
  CHECK(plan.u(0) == 0.0);
  CHECK(plan.coupling.rowwise().sum().isApprox(lp.a, 1e-14));
  CHECK(plan.coupling.colwise().sum().transpose().isApprox(lp.b, 1e-14));
  CHECK(plan.coupling.minCoeff() >= 0.0);
  CHECK_THAT((plan.coupling.array() * lp.cost.array()).sum(), WithinAbs(plan.cost, 1e-15));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j) {
      const double reduced = lp.cost(i, j) - plan.u(i) - plan.v(j);
      CHECK(reduced >= -1e-13);
      if (plan.coupling(i, j) > 1e-14) CHECK_THAT(reduced, WithinAbs(0.0, 1e-13));
    }
}

TEST_CASE("transport simplex rejects bad marginals") {
  const LpCase lp;
  Eigen::VectorXd b = lp.b;
  b(0) += 0.1;
  CHECK_THROWS_WITH(transport_lp(lp.a, b, lp.cost), ContainsSubstring("infeasible marginals"));
  CHECK_THROWS_WITH(transport_lp(lp.a, lp.b, lp.cost.leftCols(4)), ContainsSubstring("shape"));
  Eigen::VectorXd a = lp.a;
  a(1) = -0.1;
  a(2) += 0.5;
  CHECK_THROWS_AS(transport_lp(a, lp.b, lp.cost), std::invalid_argument);
}

TEST_CASE("transport with degenerate marginals") {
  // equal supplies and demands produce ties in the initial basis
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(6, 1.0 / 6.0);
  const auto g = Grid::uniform_1d(6);
  const auto plan = transport_lp(a, a, g.squared_distances());
  CHECK_THAT(plan.cost, WithinAbs(0.0, 1e-15));
  CHECK_THAT(plan.dual_value, WithinAbs(0.0, 1e-14));

  Eigen::VectorXd point = Eigen::VectorXd::Zero(6);
  point(5) = 1.0;
  const auto to_point = transport_lp(a, point, g.squared_distances());
  double expected = 0.0;
  for (double xi : g.axes()[0]) expected += (xi - g.axes()[0][5]) * (xi - g.axes()[0][5]) / 6.0;
  CHECK_THAT(to_point.cost, WithinRel(expected, 1e-13));
}

TEST_CASE("exact W2 agrees with the monotone coupling in 1-D") {
  auto g = std::make_shared<const Grid>(Grid::uniform_1d(24));
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto a = DiscreteDensity::make(g, random_dirichlet(24, 0.7, rng));
    const auto b = DiscreteDensity::make(g, random_dirichlet(24, 0.7, rng));
    const auto plan = w2_exact(a, b);
    CHECK_THAT(plan.cost, WithinAbs(monotone_w2(a.weights, b.weights, g->axes()[0]), 1e-12));
    CHECK_THAT(plan.dual_value, WithinAbs(plan.cost, 1e-12));
  }
}

TEST_CASE("exact W2 is a metric on random 2-D densities") {
  auto g = std::make_shared<const Grid>(Grid::uniform_2d(4, 4));
  Rng rng(9);
  for (int k = 0; k < 10; ++k) {
    const auto a = DiscreteDensity::make(g, random_dirichlet(16, 1.0, rng));
    const auto b = DiscreteDensity::make(g, random_dirichlet(16, 1.0, rng));
    const auto c = DiscreteDensity::make(g, random_dirichlet(16, 1.0, rng));
    const double ab = std::sqrt(w2_exact(a, b).cost), bc = std::sqrt(w2_exact(b, c).cost);
    const double ac = std::sqrt(w2_exact(a, c).cost), ba = std::sqrt(w2_exact(b, a).cost);
    CHECK_THAT(ab, WithinAbs(ba, 1e-12));
    CHECK(ac <= ab + bc + 1e-12);
    CHECK_THAT(w2_exact(a, a).cost, WithinAbs(0.0, 1e-15));
  }
}

TEST_CASE("negative entropy") {
  const auto g = Grid::uniform_1d(10);
  CHECK_THAT(negative_entropy(Eigen::VectorXd::Constant(10, 0.1), g), WithinAbs(0.0, 1e-15));
  Eigen::VectorXd w = Eigen::VectorXd::Constant(10, 0.05);
  w(0) = 0.55;
  // sum of w log(w / h) for a probability vector
  double expected = 0.0;
  for (int i = 0; i < 10; ++i) expected += w(i) * std::log(w(i) / 0.1);
  CHECK_THAT(negative_entropy(w, g), WithinRel(expected, 1e-13));
  CHECK(negative_entropy(w, g) > 0.0);
  w(1) = 0.0;
  CHECK_THROWS_WITH(negative_entropy(w, g), ContainsSubstring("nonpositive"));
}

TEST_CASE("random Dirichlet vectors live on the simplex") {
  Rng rng(1);
  for (double alpha : {0.3, 1.0, 5.0}) {
    const auto w = random_dirichlet(12, alpha, rng);
    CHECK(w.size() == 12);
    CHECK_THAT(w.sum(), WithinAbs(1.0, 1e-14));
    CHECK(w.minCoeff() >= 0.0);
  }
}

TEST_CASE("entropic quadruple inequality on random densities") {
  Rng rng(3);
  const auto r = verify_entropic_quadruple(Grid::uniform_1d(16), 200, rng);
  CHECK(r.pass);
  CHECK(r.checked == 200);
  CHECK(r.max_violation < 0.0);
}
