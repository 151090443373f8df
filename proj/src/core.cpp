#include "ermc/core.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace ermc {

PointSet::PointSet(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("empty point set");
  const auto d = points_.front().size();
  for (const auto& p : points_)
    if (p.size() != d) throw std::invalid_argument("point set mixes coordinate dimensions");
}

double set_distance(const PointSet& a, const PointSet& b, const Metric& metric) {
  double worst = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) best = std::min(best, metric(p, q));
    worst = std::max(worst, best);
  }
  return worst;
}

bool check_triangle(const PointSet& a, const PointSet& b, const PointSet& c, const Metric& metric) {
  return set_distance(a, c, metric) <= set_distance(a, b, metric) + set_distance(b, c, metric) + 1e-12;
}

Metric EstimationProblem::metric() const {
  return [this](const Point& p, const Point& q) { return distance(p, q); };
}

double EstimationProblem::error(const PointSet& estimate) const {
  return set_distance(estimate, true_minimizers(), metric());
}

}  // namespace ermc
