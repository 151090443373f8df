#include <catch_amalgamated.hpp>

#include <stdexcept>

#include "ermc/core.hpp"
#include "ermc/format.hpp"
#include "ermc/parallel.hpp"
#include "ermc/random.hpp"

using namespace ermc;

namespace {

Point p2(double x, double y) { return (Point(2) << x, y).finished(); }

double euclid(const Point& a, const Point& b) { return (a - b).norm(); }

}  // namespace

TEST_CASE("point sets reject empty input and mixed dimensions") {
  REQUIRE_THROWS_WITH(PointSet(std::vector<Point>{}), "empty point set");
  REQUIRE_THROWS_AS(PointSet({p2(0, 0), Point::Zero(3)}), std::invalid_argument);
}

TEST_CASE("set distance is sup-inf and asymmetric") {
  const PointSet a{p2(0, 0)};
  const PointSet b{p2(0, 0), p2(3, 4)};
  // a is inside b but not the other way round
  CHECK(set_distance(a, b, euclid) == 0.0);
  CHECK(set_distance(b, a, euclid) == 5.0);
  CHECK(set_distance(b, b, euclid) == 0.0);
}

TEST_CASE("set distance obeys the triangle inequality on random sets") {
  Rng rng(RngSpec{3, 0});
  for (int trial = 0; trial < 200; ++trial) {
    auto random_set = [&] {
      std::vector<Point> pts;
      const auto k = 1 + rng.index(4);
      for (std::size_t i = 0; i < k; ++i) pts.push_back(p2(rng.normal(), rng.normal()));
      return PointSet(pts);
    };
    const auto a = random_set(), b = random_set(), c = random_set();
    CHECK(check_triangle(a, b, c, euclid));
  }
}

TEST_CASE("seed derivation") {
  // reference value of the splitmix64 finalizer started from 0
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  const RngSpec s{42, 7};
  CHECK(derive_seed(s) == derive_seed(RngSpec{42, 7}));
  CHECK(derive_seed(s) != derive_seed(RngSpec{42, 8}));
  CHECK(derive_seed(s) != derive_seed(RngSpec{43, 7}));
  CHECK(s.child(1).base_seed == derive_seed(s));

  Rng a(s), b(s);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
}

TEST_CASE("rng helpers stay in range") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u < 3.0);
    CHECK(rng.index(7) < 7);
    CHECK(rng.exponential(2.0) >= 0.0);
  }
}

TEST_CASE("parallel_for is independent of the thread count") {
  std::vector<double> one(1000), four(1000);
  auto fill = [](std::vector<double>& out) {
    return [&out](std::size_t i) {
      Rng rng(RngSpec{9, i});
      out[i] = rng.normal();
    };
  };
  parallel_for(one.size(), 1, fill(one));
  parallel_for(four.size(), 4, fill(four));
  CHECK(one == four);

  REQUIRE_THROWS_WITH(parallel_for(10, 3,
                                   [](std::size_t i) {
                                     if (i == 7) throw std::runtime_error("boom");
                                   }),
                      "boom");
}

TEST_CASE("double formatting round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) CHECK(parse_double(fmt_double(x)) == x);
  CHECK(fmt_double(INFINITY) == "inf");
  CHECK(std::isinf(parse_double("inf")));
  CHECK(fmt_double(NAN) == "nan");
  REQUIRE_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_double(""), std::invalid_argument);
  CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
}
