#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "ermc/errors.hpp"
#include "ermc/hoffman.hpp"
#include "ermc/problems.hpp"

namespace ermc {

double lasso_objective(const Eigen::MatrixXd& G, const Eigen::VectorXd& c, double vv, double lambda,
                       const Eigen::VectorXd& phi) {
  return 0.5 * phi.dot(G * phi) - c.dot(phi) + 0.5 * vv + lambda * phi.lpNorm<1>();
}

LassoSolution lasso_prox_gradient(const Eigen::MatrixXd& G, const Eigen::VectorXd& c, double vv, double lambda,
                                  double tol, std::size_t max_iter) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  const auto m = c.size();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  const double lip = std::max(es.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / lip, thr = lambda * step;

  constexpr std::size_t window = 50;
  std::vector<double> history;
  history.reserve(1024);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(m);
  double f = lasso_objective(G, c, vv, lambda, phi);
  history.push_back(f);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd z = phi - step * (G * phi - c);
    for (Eigen::Index j = 0; j < m; ++j) z(j) = std::copysign(std::max(std::abs(z(j)) - thr, 0.0), z(j));
    const double fz = lasso_objective(G, c, vv, lambda, z);
    // ISTA with step 1/L never increases the objective; allow only rounding.
    if (fz > f + 1e-12 * std::max(1.0, std::abs(f))) throw std::logic_error("prox-gradient objective increased");
    phi = std::move(z);
    f = fz;
    history.push_back(f);
    if (history.size() > window) {
      const double old = history[history.size() - 1 - window];
      if (old - f <= tol / 10.0 * std::abs(f)) return {phi, f, it};
    }
  }
  throw ConvergenceError("lasso solver did not converge", phi);
}

LassoSolution lasso_solve(const SampleBatch& batch, double lambda, double tol) {
  if (batch.samples.empty()) throw std::invalid_argument("empty batch");
  const auto m = batch.samples.front().size() - 1;
  const auto n = static_cast<Eigen::Index>(batch.n());
  Eigen::MatrixXd T(n, m);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& x = batch.samples[static_cast<std::size_t>(i)];
    T.row(i) = x.head(m).transpose();
    v(i) = x(m);
  }
  const double nn = static_cast<double>(n);
  const Eigen::MatrixXd G = T.transpose() * T / nn;
  const Eigen::VectorXd c = T.transpose() * v / nn;
  return lasso_prox_gradient(G, c, v.squaredNorm() / nn, lambda, tol);
}

LassoProblem::LassoProblem(LassoConfig cfg) : cfg_(std::move(cfg)) {
  const auto m = cfg_.phi0.size();
  if (m < 1) throw std::invalid_argument("lasso needs m >= 1");
  if (!(cfg_.lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(cfg_.noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");
  const double rho = cfg_.feature_correlation;
  if (!(rho < 1.0) || (m > 1 && !(rho > -1.0 / static_cast<double>(m - 1))))
    throw std::invalid_argument("feature correlation does not give a positive definite covariance");

  cov_ = (1.0 - rho) * Eigen::MatrixXd::Identity(m, m) + rho * Eigen::MatrixXd::Ones(m, m);
  chol_ = Eigen::LLT<Eigen::MatrixXd>(cov_).matrixL();
  cross_ = cov_ * cfg_.phi0;
  ev2_ = cfg_.phi0.dot(cross_) + cfg_.noise_sd * cfg_.noise_sd;

  auto sol = lasso_prox_gradient(cov_, cross_, ev2_, cfg_.lambda, 1e-12);
  phi_star_ = sol.phi;
  j_star_ = sol.objective;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_);
  const double norm_a = std::sqrt(es.eigenvalues().maxCoeff());
  if (m <= 4) {
    const Eigen::MatrixXd A = es.operatorSqrt();
    hoffman_ = hoffman_constant(build_lasso_certificate(A, cfg_.lambda).matrix).h;
    tau_ = lasso_tau_lower_bound(hoffman_, cfg_.lambda, radius(), norm_a, ev2_);
  } else {
    Rng rng(cfg_.estimate_seed);
    tau_ = estimate_lojasiewicz_constant(*this, 20000, rng);
    tau_estimated_ = true;
    // effective H reproducing tau through the same formula, for the kappa rate
    const double R = radius(), sv = std::sqrt(ev2_);
    hoffman_ = std::sqrt(1.0 / (4.0 * tau_ * (1.0 + cfg_.lambda * R + (R * norm_a + sv) * (4.0 * R * norm_a + sv))));
  }
}

SampleBatch LassoProblem::sample(Rng& rng, std::size_t n) const {
  SampleBatch b;
  b.seed = rng.seed();
  b.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) b.samples.push_back(draw_observation(rng));
  return b;
}

Point LassoProblem::draw_observation(Rng& rng) const {
  const auto m = cfg_.phi0.size();
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z(i) = rng.normal();
  Point x(m + 1);
  x.head(m) = chol_ * z;
  x(m) = cfg_.phi0.dot(x.head(m)) + cfg_.noise_sd * rng.normal();
  return x;
}

PointSet LassoProblem::solve_empirical(const SampleBatch& batch) const {
  return PointSet{lasso_solve(batch, cfg_.lambda, cfg_.solver_tol).phi};
}

ConcentrationParams LassoProblem::params() const {
  const double mm = static_cast<double>(m());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_, Eigen::EigenvaluesOnly);
  const double cov_norm = es.eigenvalues().maxCoeff();
  const double psi_theta = psi2_gaussian(std::sqrt(cov_norm)).value;
  const double psi_v = psi2_gaussian(std::sqrt(ev2_)).value;
  const double R = radius();

  ConcentrationParams p;
  p.tau = tau_;
  p.j0 = ev2_ / cfg_.lambda;
  p.psi1_a = 4.0 * R * mm * psi_theta * psi_theta + 4.0 * std::sqrt(mm) * psi_theta * psi_v;
  p.diam_s = 0.0;
  auto rates = lasso_assumption_rates(psi_theta, psi_v, std::sqrt(ev2_), m(), hoffman_, cov_norm);
  p.eta = rates.eta;
  p.kappa = rates.kappa;
  p.iota = rates.eta;
  return p;
}

double LassoProblem::loss(const Point& phi, const Point& x) const {
  const auto m = phi.size();
  const double r = phi.dot(x.head(m)) - x(m);
  return 0.5 * r * r;
}

double LassoProblem::smoothness(const Point& x, const Point& y) const {
  if (x == y) return 0.0;
  const auto m = cfg_.phi0.size();
  const double R = radius();
  const double tx = x.head(m).norm(), ty = y.head(m).norm();
  return tx * (2.0 * R * tx + 2.0 * std::abs(x(m))) + ty * (2.0 * R * ty + 2.0 * std::abs(y(m)));
}

Point LassoProblem::draw_parameter(Rng& rng) const {
  // uniform in the Euclidean ball of radius R
  const auto m = cfg_.phi0.size();
  Point v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = rng.normal();
  return v.normalized() * radius() * std::pow(rng.uniform(), 1.0 / static_cast<double>(m));
}

double LassoProblem::population_risk(const Point& phi) const {
  return lasso_objective(cov_, cross_, ev2_, cfg_.lambda, phi);
}

Point LassoProblem::draw_level_set_point(Rng& rng) const {
  const auto m = cfg_.phi0.size();
  const double j0 = ev2_ / cfg_.lambda, R = radius();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Point phi;
    if (rng.uniform() < 0.5) {
      phi = draw_parameter(rng);
    } else {
      Point dir(m);
      for (Eigen::Index i = 0; i < m; ++i) dir(i) = rng.normal();
      phi = phi_star_ + dir.normalized() * rng.uniform(0.0, 0.5);
    }
    if (population_risk(phi) <= j0 && phi.lpNorm<1>() <= R) return phi;
  }
  throw std::runtime_error("level set is practically never hit");
}

double estimate_lojasiewicz_constant(const AssumptionModel& model, std::size_t draws, Rng& rng) {
  double best = std::numeric_limits<double>::infinity();
  const double beta = model.growth_exponent(), jstar = model.minimal_risk();
  for (std::size_t i = 0; i < draws; ++i) {
    const Point phi = model.draw_level_set_point(rng);
    const double d = model.distance_to_minimizers(phi);
    if (d < 1e-8) continue;
    best = std::min(best, (model.population_risk(phi) - jstar) / std::pow(d, beta));
  }
  if (!std::isfinite(best) || !(best > 0.0)) throw std::runtime_error("could not estimate a positive growth constant");
  return best;
}

}  // namespace ermc
