#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "ermc/problems.hpp"

namespace ermc {

Eigen::VectorXd canonical_sign(Eigen::VectorXd v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) {
      if (v(i) < 0.0) v = -v;
      break;
    }
  }
  return v;
}

Eigen::VectorXd top_eigenvector(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const auto last = symmetric.rows() - 1;
  if (!(es.eigenvalues()(last) > 0.0)) throw std::invalid_argument("degenerate covariance");
  return canonical_sign(es.eigenvectors().col(last).normalized());
}

Eigen::MatrixXd empirical_covariance(const SampleBatch& batch) {
  if (batch.n() < 2) throw std::invalid_argument("covariance needs n >= 2");
  const auto d = batch.samples.front().size();
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(batch.n()), d);
  for (std::size_t i = 0; i < batch.n(); ++i) Y.row(static_cast<Eigen::Index>(i)) = batch.samples[i].transpose();
  Y.rowwise() -= Y.colwise().mean();
  return (Y.transpose() * Y) / static_cast<double>(batch.n());
}

Eigen::VectorXd top_eigenvector_empirical(const SampleBatch& batch) {
  return top_eigenvector(empirical_covariance(batch));
}

double sphere_distance(const Point& phi, const Point& psi) {
  const double a = phi.norm(), b = psi.norm();
  if (std::abs(a - 1.0) > 1e-8 || std::abs(b - 1.0) > 1e-8) throw std::invalid_argument("sphere point is not unit norm");
  return std::acos(std::clamp(phi.dot(psi) / (a * b), -1.0, 1.0));
}

EigenvectorProblem::EigenvectorProblem(EigenvectorConfig cfg) : cfg_(std::move(cfg)) {
  const auto d = cfg_.spectrum.size();
  if (d < 2) throw std::invalid_argument("eigenvector problem needs d >= 2");
  for (Eigen::Index i = 1; i < d; ++i)
    if (cfg_.spectrum(i) > cfg_.spectrum(i - 1)) throw std::invalid_argument("spectrum must be non-increasing");
  if (!(cfg_.spectrum(0) > cfg_.spectrum(1))) throw std::invalid_argument("zero eigengap");
  if (cfg_.spectrum(d - 1) < 0.0) throw std::invalid_argument("covariance spectrum must be >= 0");

  basis_ = Eigen::MatrixXd::Identity(d, d);
  if (cfg_.rotate) {
    Rng rng(cfg_.rotation_seed);
    Eigen::MatrixXd G(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i = 0; i < d; ++i) G(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    basis_ = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j)
      if (R(j, j) < 0.0) basis_.col(j) *= -1.0;
  }
  cov_ = basis_ * cfg_.spectrum.asDiagonal() * basis_.transpose();
  u1_ = canonical_sign(basis_.col(0));
}

Eigen::VectorXd EigenvectorProblem::draw_y(Rng& rng) const {
  Eigen::VectorXd z(cfg_.spectrum.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = std::sqrt(cfg_.spectrum(i)) * rng.normal();
  return basis_ * z;
}

SampleBatch EigenvectorProblem::sample(Rng& rng, std::size_t n) const {
  SampleBatch b;
  b.seed = rng.seed();
  b.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) b.samples.push_back(draw_y(rng));
  return b;
}

PointSet EigenvectorProblem::solve_empirical(const SampleBatch& batch) const {
  Eigen::VectorXd v = top_eigenvector_empirical(batch);
  return PointSet{v, Point(-v)};
}

double EigenvectorProblem::psi2_y() const { return psi2_gaussian(std::sqrt(cfg_.spectrum(0))).value; }

double EigenvectorProblem::kappa_rate() const {
  const double e = std::numbers::e, d = static_cast<double>(cfg_.spectrum.size());
  const double p2 = psi2_y() * psi2_y(), g = gap();
  return g * g / (32.0 * e * e * d * d * p2 * p2 + 8.0 * e * d * p2 * g);
}

double EigenvectorProblem::growth_constant() const { return 4.0 / (std::numbers::pi * std::numbers::pi) * gap(); }

ConcentrationParams EigenvectorProblem::params() const {
  ConcentrationParams p;
  const double d = static_cast<double>(cfg_.spectrum.size());
  p.tau = growth_constant();
  p.psi1_a = 8.0 * d * psi2_y() * psi2_y();
  p.diam_s = std::numbers::pi;
  p.kappa = RateFunction::exponential(d, kappa_rate());
  return p;
}

double EigenvectorProblem::loss(const Point& phi, const Point& x) const {
  const auto d = phi.size();
  const double yp = x.head(d).dot(phi), zp = x.tail(d).dot(phi);
  return -(yp * yp - yp * zp);
}

double EigenvectorProblem::smoothness(const Point& x, const Point& y) const {
  if (x == y) return 0.0;
  const auto d = cfg_.spectrum.size();
  const double ny = x.head(d).norm(), nz = x.tail(d).norm();
  const double my = y.head(d).norm(), mz = y.tail(d).norm();
  return cfg_.a_scale * 2.0 * (ny * ny + my * my + ny * nz + my * mz);
}

Point EigenvectorProblem::draw_parameter(Rng& rng) const {
  Point v(cfg_.spectrum.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  return v.normalized();
}

Point EigenvectorProblem::draw_observation(Rng& rng) const {
  const auto d = cfg_.spectrum.size();
  Point x(2 * d);
  x.head(d) = draw_y(rng);
  x.tail(d) = draw_y(rng);
  return x;
}

double EigenvectorProblem::distance_to_minimizers(const Point& phi) const {
  return std::acos(std::clamp(std::abs(phi.dot(u1_)) / phi.norm(), 0.0, 1.0));
}

Point EigenvectorProblem::draw_level_set_point(Rng& rng) const {
  if (rng.uniform() < 0.5) return draw_parameter(rng);
  // near the minimizer, where the growth bound is tight
  Point w = draw_parameter(rng);
  w -= w.dot(u1_) * u1_;
  w.normalize();
  const double theta = rng.uniform(0.0, 0.3);
  Point v = std::cos(theta) * u1_ + std::sin(theta) * w;
  return rng.uniform() < 0.5 ? v : Point(-v);
}

}  // namespace ermc
