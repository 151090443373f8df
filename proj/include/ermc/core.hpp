#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ermc/bounds.hpp"
#include "ermc/random.hpp"

namespace ermc {

using Point = Eigen::VectorXd;
using Metric = std::function<double(const Point&, const Point&)>;

// Non-empty finite set of points sharing one coordinate dimension.
class PointSet {
 public:
  explicit PointSet(std::vector<Point> points);
  PointSet(std::initializer_list<Point> points) : PointSet(std::vector<Point>(points)) {}

  std::size_t size() const { return points_.size(); }
  Eigen::Index dim() const { return points_.front().size(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const { return points_; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

 private:
  std::vector<Point> points_;
};

// sup over a of inf over b. Asymmetric: zero iff a is contained in b.
double set_distance(const PointSet& a, const PointSet& b, const Metric& metric);

bool check_triangle(const PointSet& a, const PointSet& b, const PointSet& c, const Metric& metric);

struct SampleBatch {
  std::vector<Point> samples;
  std::uint64_t seed = 0;
  std::size_t n() const { return samples.size(); }
};

class EstimationProblem {
 public:
  virtual ~EstimationProblem() = default;

  virtual std::string name() const = 0;
  virtual SampleBatch sample(Rng& rng, std::size_t n) const = 0;
  virtual PointSet solve_empirical(const SampleBatch& batch) const = 0;
  virtual PointSet true_minimizers() const = 0;
  virtual double distance(const Point& p, const Point& q) const = 0;
  virtual ConcentrationParams params() const = 0;

  // The estimation error dist(S_hat; S).
  double error(const PointSet& estimate) const;
  Metric metric() const;
};

// Loss-level view of a problem, used by the assumption verifiers.
class AssumptionModel {
 public:
  virtual ~AssumptionModel() = default;

  virtual double loss(const Point& phi, const Point& x) const = 0;
  virtual double smoothness(const Point& x, const Point& y) const = 0;  // a(x, y)
  virtual double holder_exponent() const { return 1.0; }                // alpha
  virtual double param_distance(const Point& phi, const Point& psi) const = 0;
  virtual Point draw_parameter(Rng& rng) const = 0;
  virtual Point draw_observation(Rng& rng) const = 0;

  // Population side for the growth condition.
  virtual double population_risk(const Point& phi) const = 0;
  virtual double minimal_risk() const = 0;
  virtual double distance_to_minimizers(const Point& phi) const = 0;
  virtual double growth_constant() const = 0;  // tau
  virtual double growth_exponent() const { return 2.0; }
  // Draw a parameter inside the level set on which the growth condition is claimed.
  virtual Point draw_level_set_point(Rng& rng) const { return draw_parameter(rng); }
};

}  // namespace ermc
