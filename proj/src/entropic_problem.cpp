#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ermc/transport.hpp"

namespace ermc {

EntropicBarycenterProblem::EntropicBarycenterProblem(EntropicConfig cfg) : cfg_(cfg) {
  if (cfg_.nodes < 2 || cfg_.nodes > 128) throw std::invalid_argument("entropic grid needs 2..128 nodes");
  if (!(cfg_.lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (cfg_.pool_size < 1 || cfg_.bumps < 1) throw std::invalid_argument("pool needs measures and bumps");
  if (!(cfg_.width_min > 0.0) || !(cfg_.width_max >= cfg_.width_min)) throw std::invalid_argument("bad bump widths");
  if (!(cfg_.dirichlet_alpha > 0.0)) throw std::invalid_argument("dirichlet alpha must be > 0");
  grid_ = std::make_shared<const Grid>(Grid::uniform_1d(cfg_.nodes));

  // mu: uniform over a fixed pool of random bump mixtures, truncated to the grid
  Rng rng(cfg_.pool_seed);
  const auto& x = grid_->axes()[0];
  for (std::size_t k = 0; k < cfg_.pool_size; ++k) {
    const Eigen::VectorXd mix = random_dirichlet(cfg_.bumps, cfg_.dirichlet_alpha, rng);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.size()));
    for (std::size_t b = 0; b < cfg_.bumps; ++b) {
      const double c = rng.uniform(x.front(), x.back());
      const double s = rng.uniform(cfg_.width_min, cfg_.width_max);
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double z = (x[j] - c) / s;
        w(static_cast<Eigen::Index>(j)) += mix(static_cast<Eigen::Index>(b)) * std::exp(-0.5 * z * z) / s;
      }
    }
    pool_.push_back(w / w.sum());
  }

  std::vector<double> weights(pool_.size(), 1.0 / static_cast<double>(pool_.size()));
  BarycenterOptions opts = solver_options();
  opts.tol = std::min(opts.tol, 1e-14);
  phi_star_ = entropic_barycenter_solve(pool_, weights, cfg_.lambda, *grid_, opts).weights;
}

BarycenterOptions EntropicBarycenterProblem::solver_options() const {
  BarycenterOptions o;
  o.tol = cfg_.solver_tol;
  o.step0 = cfg_.step0;
  return o;
}

SampleBatch EntropicBarycenterProblem::sample(Rng& rng, std::size_t n) const {
  SampleBatch b;
  b.seed = rng.seed();
  b.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) b.samples.push_back(pool_[rng.index(pool_.size())]);
  return b;
}

PointSet EntropicBarycenterProblem::solve_empirical(const SampleBatch& batch) const {
  if (batch.samples.empty()) throw std::invalid_argument("empty batch");
  // Repeated draws collapse into one measure with a larger weight; distinct
  // measures are kept in first-seen order.
  std::vector<Eigen::VectorXd> measures;
  std::vector<double> weights;
  const double w = 1.0 / static_cast<double>(batch.n());
  for (const auto& s : batch.samples) {
    auto it = std::find_if(measures.begin(), measures.end(), [&](const Eigen::VectorXd& m) { return m == s; });
    if (it == measures.end()) {
      measures.push_back(s);
      weights.push_back(w);
    } else {
      weights[static_cast<std::size_t>(it - measures.begin())] += w;
    }
  }
  return PointSet{entropic_barycenter_solve(measures, weights, cfg_.lambda, *grid_, solver_options()).weights};
}

ConcentrationParams EntropicBarycenterProblem::params() const {
  ConcentrationParams p;
  const double diam = grid_->diameter();
  p.tau = 2.0;
  p.psi1_a = 4.0 * diam * diam;
  p.diam_s = 0.0;
  return p;
}

}  // namespace ermc
