#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "ermc/problems.hpp"

namespace ermc {

VerifyResult verify_quadruple_inequality(const AssumptionModel& model, std::size_t n_quadruples, Rng& rng,
                                         double tol) {
  VerifyResult r;
  r.tolerance = tol;
  r.max_violation = -std::numeric_limits<double>::infinity();
  const double alpha = model.holder_exponent();
  for (std::size_t i = 0; i < n_quadruples; ++i) {
    const Point phi = model.draw_parameter(rng), psi = model.draw_parameter(rng);
    const Point x = model.draw_observation(rng), y = model.draw_observation(rng);
    const double lhs = model.loss(phi, x) - model.loss(psi, x) - model.loss(phi, y) + model.loss(psi, y);
    const double rhs = model.smoothness(x, y) * std::pow(model.param_distance(phi, psi), alpha);
    r.max_violation = std::max(r.max_violation, lhs - rhs);
    ++r.checked;
  }
  if (r.checked == 0) r.max_violation = 0.0;
  r.pass = r.max_violation <= tol;
  return r;
}

VerifyResult verify_variance_inequality(const AssumptionModel& model, std::size_t n_points, Rng& rng, double tol) {
  VerifyResult r;
  r.tolerance = tol;
  r.max_violation = -std::numeric_limits<double>::infinity();
  const double tau = model.growth_constant(), beta = model.growth_exponent(), jstar = model.minimal_risk();
  for (std::size_t i = 0; i < n_points; ++i) {
    const Point phi = model.draw_level_set_point(rng);
    const double v = tau * std::pow(model.distance_to_minimizers(phi), beta) - (model.population_risk(phi) - jstar);
    r.max_violation = std::max(r.max_violation, v);
    ++r.checked;
  }
  if (r.checked == 0) r.max_violation = 0.0;
  r.pass = r.max_violation <= tol;
  return r;
}

VerifyResult verify_eigengap_lemma(const Eigen::MatrixXd& A, std::size_t n_vectors, Rng& rng) {
  if (A.rows() != A.cols() || A.rows() < 2) throw std::invalid_argument("eigengap lemma needs a square matrix, d >= 2");
  if (!A.isApprox(A.transpose(), 1e-12)) throw std::invalid_argument("matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  const auto d = A.rows();
  const Eigen::VectorXd u1 = es.eigenvectors().col(d - 1);
  const double l1 = es.eigenvalues()(d - 1), l2 = es.eigenvalues()(d - 2);
  const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
  const double top = u1.dot(A * u1);

  VerifyResult r;
  r.tolerance = 1e-9 * norm;
  for (std::size_t i = 0; i < n_vectors; ++i) {
    Eigen::VectorXd v(d);
    for (Eigen::Index j = 0; j < d; ++j) v(j) = rng.normal();
    v -= v.dot(u1) * u1;
    v *= rng.uniform(0.0, 3.0);
    const double n2 = v.squaredNorm();
    r.max_violation = std::max(r.max_violation, (l1 - l2) * n2 - (n2 * top - v.dot(A * v)));
    ++r.checked;
  }
  r.pass = r.max_violation <= r.tolerance;
  return r;
}

double davis_kahan_bound(const Eigen::MatrixXd& cov_true, const Eigen::MatrixXd& cov_emp) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_true, Eigen::EigenvaluesOnly);
  const auto d = cov_true.rows();
  if (d < 2) throw std::invalid_argument("Davis-Kahan needs d >= 2");
  const double gap = es.eigenvalues()(d - 1) - es.eigenvalues()(d - 2);
  if (!(gap > 0.0)) throw std::invalid_argument("zero eigengap");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> diff(cov_emp - cov_true, Eigen::EigenvaluesOnly);
  return 2.0 * std::numbers::sqrt2 * diff.eigenvalues().cwiseAbs().maxCoeff() / gap;
}

}  // namespace ermc
