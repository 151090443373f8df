#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ermc/problems.hpp"

namespace ermc {

namespace {

int leg_of(const Point& p) { return static_cast<int>(p(0)); }

void check_on_tree(const Point& p, std::size_t legs) {
  if (p.size() != 2 || !(p(1) >= 0.0) || p(0) < 0.0 || p(0) != std::floor(p(0)) ||
      (legs > 0 && p(0) >= static_cast<double>(legs)))
    throw std::invalid_argument("sample off-tree");
}

}  // namespace

Point spider_point(int leg, double r) {
  if (r == 0.0) leg = 0;
  Point p(2);
  p << static_cast<double>(leg), r;
  return p;
}

double spider_distance(const Point& p, const Point& q) {
  if (leg_of(p) == leg_of(q) || p(1) == 0.0 || q(1) == 0.0) return std::abs(p(1) - q(1));
  return p(1) + q(1);
}

double spider_frechet_objective(const SampleBatch& batch, const Point& phi) {
  double acc = 0.0;
  for (const auto& x : batch.samples) {
    const double d = spider_distance(phi, x);
    acc += d * d;
  }
  return acc / static_cast<double>(batch.n());
}

Point frechet_mean_spider(const SampleBatch& batch, std::size_t legs) {
  if (batch.samples.empty()) throw std::invalid_argument("empty batch");
  std::vector<double> on_leg(legs, 0.0);
  double total = 0.0;
  for (const auto& x : batch.samples) {
    check_on_tree(x, legs);
    on_leg[leg_of(x)] += x(1);
    total += x(1);
  }
  // Along leg l the objective is t^2 - 2 t g_l + const, g_l = (own - others)/n.
  const double n = static_cast<double>(batch.n());
  double best_t = 0.0;
  int best_leg = 0;
  bool tie = false;
  for (std::size_t l = 0; l < legs; ++l) {
    const double t = std::max(0.0, (2.0 * on_leg[l] - total) / n);
    if (t > best_t) {
      best_t = t;
      best_leg = static_cast<int>(l);
      tie = false;
    } else if (t == best_t && t > 0.0) {
      tie = true;
    }
  }
  if (tie) return spider_point(0, 0.0);
  return spider_point(best_leg, best_t);
}

SpiderTreeBarycenterProblem::SpiderTreeBarycenterProblem(SpiderConfig cfg) : cfg_(std::move(cfg)) {
  const std::size_t k = cfg_.leg_probs.size();
  if (k < 2 || cfg_.leg_lengths.size() != k) throw std::invalid_argument("spider needs >= 2 legs with lengths");
  for (std::size_t l = 0; l < k; ++l)
    if (!(cfg_.leg_probs[l] >= 0.0) || !(cfg_.leg_lengths[l] > 0.0) || !std::isfinite(cfg_.leg_lengths[l]))
      throw std::invalid_argument("spider leg probabilities must be >= 0 and lengths finite and > 0");
  const double total = std::accumulate(cfg_.leg_probs.begin(), cfg_.leg_probs.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("spider leg probabilities must sum to 1");

  // radius on leg l is Uniform[0, L_l], mean L_l / 2
  double mass = 0.0;
  for (std::size_t l = 0; l < k; ++l) mass += cfg_.leg_probs[l] * cfg_.leg_lengths[l] / 2.0;
  mean_ = spider_point(0, 0.0);
  for (std::size_t l = 0; l < k; ++l) {
    const double g = 2.0 * cfg_.leg_probs[l] * cfg_.leg_lengths[l] / 2.0 - mass;
    if (g > 0.0) mean_ = spider_point(static_cast<int>(l), g);
  }

  Rng rng(cfg_.calibration_seed);
  std::vector<double> d(cfg_.calibration_draws);
  for (auto& v : d) v = spider_distance(draw(rng), draw(rng));
  rho_psi1_ = psi_norm_empirical(d, 1.0);
}

Point SpiderTreeBarycenterProblem::draw(Rng& rng) const {
  double u = rng.uniform(), acc = 0.0;
  std::size_t leg = 0;
  for (; leg + 1 < cfg_.leg_probs.size(); ++leg) {
    acc += cfg_.leg_probs[leg];
    if (u < acc) break;
  }
  return spider_point(static_cast<int>(leg), rng.uniform(0.0, cfg_.leg_lengths[leg]));
}

SampleBatch SpiderTreeBarycenterProblem::sample(Rng& rng, std::size_t n) const {
  SampleBatch b;
  b.seed = rng.seed();
  b.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) b.samples.push_back(draw(rng));
  return b;
}

PointSet SpiderTreeBarycenterProblem::solve_empirical(const SampleBatch& batch) const {
  return PointSet{frechet_mean_spider(batch, cfg_.leg_probs.size())};
}

ConcentrationParams SpiderTreeBarycenterProblem::params() const {
  ConcentrationParams p;
  p.psi1_a = 2.0 * rho_psi1_.value;
  return p;
}

double SpiderTreeBarycenterProblem::loss(const Point& phi, const Point& x) const {
  const double d = spider_distance(phi, x);
  return d * d;
}

double SpiderTreeBarycenterProblem::smoothness(const Point& x, const Point& y) const {
  return cfg_.a_scale * 2.0 * spider_distance(x, y);
}

Point SpiderTreeBarycenterProblem::draw_parameter(Rng& rng) const {
  if (rng.uniform() < 0.1) return spider_point(0, 0.0);
  const std::size_t leg = rng.index(cfg_.leg_probs.size());
  return spider_point(static_cast<int>(leg), rng.uniform(0.0, cfg_.leg_lengths[leg]));
}

double SpiderTreeBarycenterProblem::population_risk(const Point& phi) const {
  // E rho(phi, X)^2 with X uniform along its leg
  double acc = 0.0;
  const double t = phi(1);
  for (std::size_t l = 0; l < cfg_.leg_probs.size(); ++l) {
    const double L = cfg_.leg_lengths[l];
    const double second = L * L / 3.0, first = L / 2.0;
    const bool same = t == 0.0 || leg_of(phi) == static_cast<int>(l);
    acc += cfg_.leg_probs[l] * (t * t + (same ? -2.0 : 2.0) * t * first + second);
  }
  return acc;
}

}  // namespace ermc
