#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ermc/core.hpp"
#include "ermc/orlicz.hpp"

namespace ermc {

// ---------------------------------------------------------------- Euclidean

enum class EuclideanFamily { Gaussian, Uniform, Laplace };

std::string to_string(EuclideanFamily f);
EuclideanFamily parse_euclidean_family(const std::string& s);

struct EuclideanConfig {
  EuclideanFamily family = EuclideanFamily::Gaussian;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  // per-coordinate scale: Gaussian sd, Uniform half-width, Laplace b
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(2);
  double a_scale = 1.0;  // multiplies a = 2 rho; < 1 injects a faulty constant
  std::size_t calibration_draws = 1'000'000;
  std::uint64_t calibration_seed = 20240601;
};

Point frechet_mean_euclidean(const SampleBatch& batch);

class EuclideanBarycenterProblem : public EstimationProblem, public AssumptionModel {
 public:
  explicit EuclideanBarycenterProblem(EuclideanConfig cfg);

  std::string name() const override { return "euclidean"; }
  SampleBatch sample(Rng& rng, std::size_t n) const override;
  PointSet solve_empirical(const SampleBatch& batch) const override;
  PointSet true_minimizers() const override { return PointSet{cfg_.mean}; }
  double distance(const Point& p, const Point& q) const override { return (p - q).norm(); }
  ConcentrationParams params() const override;

  double loss(const Point& phi, const Point& x) const override { return (phi - x).squaredNorm(); }
  double smoothness(const Point& x, const Point& y) const override;
  double param_distance(const Point& p, const Point& q) const override { return distance(p, q); }
  Point draw_parameter(Rng& rng) const override;
  Point draw_observation(Rng& rng) const override { return draw(rng); }
  double population_risk(const Point& phi) const override;
  double minimal_risk() const override { return trace_cov(); }
  double distance_to_minimizers(const Point& phi) const override { return distance(phi, cfg_.mean); }
  double growth_constant() const override { return 1.0; }

  double trace_cov() const;
  const OrliczEstimate& rho_psi1() const { return rho_psi1_; }
  const EuclideanConfig& config() const { return cfg_; }

 private:
  Point draw(Rng& rng) const;
  EuclideanConfig cfg_;
  OrliczEstimate rho_psi1_;
};

// -------------------------------------------------------------- spider tree

// Points are (leg, r): leg index stored as a double, r >= 0 the distance to
// the origin. The origin is (0, 0).
struct SpiderConfig {
  std::vector<double> leg_probs = {0.6, 0.2, 0.2};
  std::vector<double> leg_lengths = {1.0, 1.0, 1.0};
  double a_scale = 1.0;
  std::size_t calibration_draws = 1'000'000;
  std::uint64_t calibration_seed = 20240602;
};

double spider_distance(const Point& p, const Point& q);
Point spider_point(int leg, double r);
Point frechet_mean_spider(const SampleBatch& batch, std::size_t legs);
double spider_frechet_objective(const SampleBatch& batch, const Point& phi);

class SpiderTreeBarycenterProblem : public EstimationProblem, public AssumptionModel {
 public:
  explicit SpiderTreeBarycenterProblem(SpiderConfig cfg);

  std::string name() const override { return "spider"; }
  SampleBatch sample(Rng& rng, std::size_t n) const override;
  PointSet solve_empirical(const SampleBatch& batch) const override;
  PointSet true_minimizers() const override { return PointSet{mean_}; }
  double distance(const Point& p, const Point& q) const override { return spider_distance(p, q); }
  ConcentrationParams params() const override;

  double loss(const Point& phi, const Point& x) const override;
  double smoothness(const Point& x, const Point& y) const override;
  double param_distance(const Point& p, const Point& q) const override { return spider_distance(p, q); }
  Point draw_parameter(Rng& rng) const override;
  Point draw_observation(Rng& rng) const override { return draw(rng); }
  double population_risk(const Point& phi) const override;
  double minimal_risk() const override { return population_risk(mean_); }
  double distance_to_minimizers(const Point& phi) const override { return spider_distance(phi, mean_); }
  double growth_constant() const override { return 1.0; }

  const Point& population_mean() const { return mean_; }
  const OrliczEstimate& rho_psi1() const { return rho_psi1_; }

 private:
  Point draw(Rng& rng) const;
  SpiderConfig cfg_;
  Point mean_;
  OrliczEstimate rho_psi1_;
};

// ------------------------------------------------------------- eigenvector

struct EigenvectorConfig {
  Eigen::VectorXd spectrum = (Eigen::VectorXd(5) << 2.0, 1.0, 0.5, 0.25, 0.1).finished();
  bool rotate = true;
  std::uint64_t rotation_seed = 20240603;
  double a_scale = 1.0;
};

// Sign convention: first nonzero coordinate positive.
Eigen::VectorXd canonical_sign(Eigen::VectorXd v);
Eigen::VectorXd top_eigenvector(const Eigen::MatrixXd& symmetric);
Eigen::MatrixXd empirical_covariance(const SampleBatch& batch);
Eigen::VectorXd top_eigenvector_empirical(const SampleBatch& batch);
double sphere_distance(const Point& phi, const Point& psi);

class EigenvectorProblem : public EstimationProblem, public AssumptionModel {
 public:
  explicit EigenvectorProblem(EigenvectorConfig cfg);

  std::string name() const override { return "eigenvector"; }
  SampleBatch sample(Rng& rng, std::size_t n) const override;
  PointSet solve_empirical(const SampleBatch& batch) const override;
  PointSet true_minimizers() const override { return PointSet{u1_, Point(-u1_)}; }
  double distance(const Point& p, const Point& q) const override { return sphere_distance(p, q); }
  ConcentrationParams params() const override;

  // observations are (y, z) stacked into R^{2d}
  double loss(const Point& phi, const Point& x) const override;
  double smoothness(const Point& x, const Point& y) const override;
  double param_distance(const Point& p, const Point& q) const override { return sphere_distance(p, q); }
  Point draw_parameter(Rng& rng) const override;
  Point draw_observation(Rng& rng) const override;
  double population_risk(const Point& phi) const override { return -phi.dot(cov_ * phi); }
  double minimal_risk() const override { return -cfg_.spectrum(0); }
  double distance_to_minimizers(const Point& phi) const override;
  double growth_constant() const override;
  Point draw_level_set_point(Rng& rng) const override;

  const Eigen::MatrixXd& covariance() const { return cov_; }
  const Eigen::VectorXd& u1() const { return u1_; }
  double gap() const { return cfg_.spectrum(0) - cfg_.spectrum(1); }
  double psi2_y() const;
  double kappa_rate() const;  // c in kappa(n) = d exp(-c n)

 private:
  Eigen::VectorXd draw_y(Rng& rng) const;
  EigenvectorConfig cfg_;
  Eigen::MatrixXd basis_;  // columns: eigenvectors
  Eigen::MatrixXd cov_;
  Eigen::VectorXd u1_;
};

// ------------------------------------------------------------------- LASSO

struct LassoConfig {
  Eigen::VectorXd phi0 = (Eigen::VectorXd(3) << 1.0, -0.5, 0.0).finished();
  double feature_correlation = 0.3;  // equicorrelated unit-variance Gaussian features
  double noise_sd = 0.5;
  double lambda = 0.1;
  double solver_tol = 1e-10;
  std::uint64_t estimate_seed = 20240604;  // used only by the estimated-tau fallback
};

struct LassoSolution {
  Eigen::VectorXd phi;
  double objective = 0.0;
  std::size_t iterations = 0;
};

// Minimizes 1/2 phi'G phi - c'phi + 1/2 vv + lambda |phi|_1 by proximal gradient.
LassoSolution lasso_prox_gradient(const Eigen::MatrixXd& G, const Eigen::VectorXd& c, double vv, double lambda,
                                  double tol, std::size_t max_iter = 1'000'000);
// Batch rows are (theta(y), v); the empirical risk is normalized by 1/n.
LassoSolution lasso_solve(const SampleBatch& batch, double lambda, double tol);

double lasso_objective(const Eigen::MatrixXd& G, const Eigen::VectorXd& c, double vv, double lambda,
                       const Eigen::VectorXd& phi);

class LassoProblem : public EstimationProblem, public AssumptionModel {
 public:
  explicit LassoProblem(LassoConfig cfg);

  std::string name() const override { return "lasso"; }
  SampleBatch sample(Rng& rng, std::size_t n) const override;
  PointSet solve_empirical(const SampleBatch& batch) const override;
  PointSet true_minimizers() const override { return PointSet{phi_star_}; }
  double distance(const Point& p, const Point& q) const override { return (p - q).norm(); }
  ConcentrationParams params() const override;

  double loss(const Point& phi, const Point& x) const override;
  double smoothness(const Point& x, const Point& y) const override;
  double param_distance(const Point& p, const Point& q) const override { return distance(p, q); }
  Point draw_parameter(Rng& rng) const override;
  Point draw_observation(Rng& rng) const override;
  double population_risk(const Point& phi) const override;
  double minimal_risk() const override { return j_star_; }
  double distance_to_minimizers(const Point& phi) const override { return (phi - phi_star_).norm(); }
  double growth_constant() const override { return tau_; }
  Point draw_level_set_point(Rng& rng) const override;

  std::size_t m() const { return static_cast<std::size_t>(cfg_.phi0.size()); }
  double ev2() const { return ev2_; }
  double radius() const { return ev2_ / cfg_.lambda; }
  double hoffman() const { return hoffman_; }
  bool tau_estimated() const { return tau_estimated_; }
  const Eigen::VectorXd& phi_star() const { return phi_star_; }
  const Eigen::MatrixXd& feature_cov() const { return cov_; }

 private:
  LassoConfig cfg_;
  Eigen::MatrixXd cov_, chol_;
  Eigen::VectorXd cross_;  // E[theta V]
  double ev2_ = 0.0;
  Eigen::VectorXd phi_star_;
  double j_star_ = 0.0;
  double hoffman_ = 0.0;
  double tau_ = 0.0;
  bool tau_estimated_ = false;
};

// Smallest (J(phi) - J*) / |phi - phi*|^2 over random level-set points.
double estimate_lojasiewicz_constant(const AssumptionModel& model, std::size_t draws, Rng& rng);

// ---------------------------------------------------------------- verifiers

struct VerifyResult {
  double max_violation = 0.0;
  std::size_t checked = 0;
  double tolerance = 1e-9;
  bool pass = true;
};

VerifyResult verify_quadruple_inequality(const AssumptionModel& model, std::size_t n_quadruples, Rng& rng,
                                         double tol = 1e-9);
VerifyResult verify_variance_inequality(const AssumptionModel& model, std::size_t n_points, Rng& rng,
                                        double tol = 1e-9);
// v drawn orthogonal to the top eigenvector; tolerance is 1e-9 * |A|.
VerifyResult verify_eigengap_lemma(const Eigen::MatrixXd& A, std::size_t n_vectors, Rng& rng);

double davis_kahan_bound(const Eigen::MatrixXd& cov_true, const Eigen::MatrixXd& cov_emp);

}  // namespace ermc
