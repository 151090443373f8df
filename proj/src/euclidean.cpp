#include <cmath>
#include <stdexcept>

#include "ermc/problems.hpp"

namespace ermc {

std::string to_string(EuclideanFamily f) {
  switch (f) {
    case EuclideanFamily::Gaussian: return "gaussian";
    case EuclideanFamily::Uniform: return "uniform";
    case EuclideanFamily::Laplace: return "laplace";
  }
  return "?";
}

EuclideanFamily parse_euclidean_family(const std::string& s) {
  if (s == "gaussian") return EuclideanFamily::Gaussian;
  if (s == "uniform") return EuclideanFamily::Uniform;
  if (s == "laplace") return EuclideanFamily::Laplace;
  throw std::invalid_argument("unknown euclidean family '" + s + "'");
}

Point frechet_mean_euclidean(const SampleBatch& batch) {
  if (batch.samples.empty()) throw std::invalid_argument("empty batch");
  Point acc = Point::Zero(batch.samples.front().size());
  for (const auto& x : batch.samples) acc += x;
  return acc / static_cast<double>(batch.n());
}

EuclideanBarycenterProblem::EuclideanBarycenterProblem(EuclideanConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.mean.size() == 0 || cfg_.mean.size() != cfg_.scale.size())
    throw std::invalid_argument("euclidean mean and scale must have the same positive dimension");
  if ((cfg_.scale.array() < 0.0).any()) throw std::invalid_argument("euclidean scales must be >= 0");
  if (cfg_.calibration_draws == 0) throw std::invalid_argument("calibration needs draws");
  // |X - X'| has no tidy closed form for these families; calibrate once.
  Rng rng(cfg_.calibration_seed);
  std::vector<double> d(cfg_.calibration_draws);
  for (auto& v : d) v = (draw(rng) - draw(rng)).norm();
  rho_psi1_ = psi_norm_empirical(d, 1.0);
}

Point EuclideanBarycenterProblem::draw(Rng& rng) const {
  Point x(cfg_.mean.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double z = 0.0;
    switch (cfg_.family) {
      case EuclideanFamily::Gaussian: z = rng.normal(); break;
      case EuclideanFamily::Uniform: z = rng.uniform(-1.0, 1.0); break;
      case EuclideanFamily::Laplace: {
        const double e = rng.exponential();
        z = rng.uniform() < 0.5 ? -e : e;
        break;
      }
    }
    x(i) = cfg_.mean(i) + cfg_.scale(i) * z;
  }
  return x;
}

SampleBatch EuclideanBarycenterProblem::sample(Rng& rng, std::size_t n) const {
  SampleBatch b;
  b.seed = rng.seed();
  b.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) b.samples.push_back(draw(rng));
  return b;
}

PointSet EuclideanBarycenterProblem::solve_empirical(const SampleBatch& batch) const {
  return PointSet{frechet_mean_euclidean(batch)};
}

ConcentrationParams EuclideanBarycenterProblem::params() const {
  ConcentrationParams p;
  p.beta = 2.0;
  p.alpha = 1.0;
  p.tau = 1.0;
  p.psi1_a = 2.0 * rho_psi1_.value;
  p.diam_s = 0.0;
  return p;
}

double EuclideanBarycenterProblem::smoothness(const Point& x, const Point& y) const {
  return cfg_.a_scale * 2.0 * (x - y).norm();
}

Point EuclideanBarycenterProblem::draw_parameter(Rng& rng) const {
  Point p(cfg_.mean.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = cfg_.mean(i) + 3.0 * std::max(cfg_.scale(i), 1.0) * rng.normal();
  return p;
}

double EuclideanBarycenterProblem::population_risk(const Point& phi) const {
  return (phi - cfg_.mean).squaredNorm() + trace_cov();
}

double EuclideanBarycenterProblem::trace_cov() const {
  const double s2 = cfg_.scale.squaredNorm();
  switch (cfg_.family) {
    case EuclideanFamily::Gaussian: return s2;
    case EuclideanFamily::Uniform: return s2 / 3.0;
    case EuclideanFamily::Laplace: return 2.0 * s2;
  }
  return s2;
}

}  // namespace ermc
