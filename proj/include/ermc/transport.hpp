#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "ermc/problems.hpp"
#include "ermc/random.hpp"

namespace ermc {

// Tensor grid with uniformly spaced, cell-centred nodes along each axis.
class Grid {
 public:
  static Grid uniform_1d(std::size_t nodes, double lo = 0.0, double hi = 1.0);
  static Grid uniform_2d(std::size_t nx, std::size_t ny, double lo = 0.0, double hi = 1.0);

  int dimension() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const { return static_cast<std::size_t>(nodes_.rows()); }
  const Eigen::MatrixXd& nodes() const { return nodes_; }  // size x dimension
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  double cell_volume() const { return cell_volume_; }
  double domain_volume() const { return cell_volume_ * static_cast<double>(size()); }
  double diameter() const { return diameter_; }  // max pairwise node distance

  Eigen::MatrixXd squared_distances() const;

 private:
  Grid(std::vector<std::vector<double>> axes, double cell_volume);
  std::vector<std::vector<double>> axes_;
  Eigen::MatrixXd nodes_;
  double cell_volume_ = 0.0;
  double diameter_ = 0.0;
};

// Probability vector on a grid: weights = density values times cell volume.
struct DiscreteDensity {
  std::shared_ptr<const Grid> grid;
  Eigen::VectorXd weights;

  static DiscreteDensity make(std::shared_ptr<const Grid> grid, Eigen::VectorXd weights);
  double density(std::size_t i) const { return weights(static_cast<Eigen::Index>(i)) / grid->cell_volume(); }
};

struct TransportPlan {
  Eigen::MatrixXd coupling;
  double cost = 0.0;        // sum of coupling * squared distance
  Eigen::VectorXd u, v;     // Kantorovich potentials, u(0) = 0
  double dual_value = 0.0;  // <a, u> + <b, v>
  std::size_t pivots = 0;
};

// Exact transportation simplex; supplies and demands must have equal mass.
TransportPlan transport_lp(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost);
TransportPlan w2_exact(const DiscreteDensity& a, const DiscreteDensity& b);

// sum over nodes of cellvol * (f log f - f + 1), f = weight / cellvol
double negative_entropy(const Eigen::VectorXd& weights, const Grid& grid);

// (1/2) sum_i w_i W2^2(phi, psi_i) + lambda R(phi), transport by exact LP
double entropic_objective(const DiscreteDensity& phi, const std::vector<DiscreteDensity>& measures,
                          const std::vector<double>& weights, double lambda);

// The transport part (1/2) sum_i w_i W2^2(., psi_i) and its gradient in the weights.
class TransportTerm {
 public:
  virtual ~TransportTerm() = default;
  virtual double value(const Eigen::VectorXd& phi) const = 0;
  // Kantorovich potential aggregate, defined up to an additive constant.
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& phi) const = 0;
};

// Exact LP against every measure; any grid.
class ExactTransportTerm : public TransportTerm {
 public:
  ExactTransportTerm(const Grid& grid, std::vector<Eigen::VectorXd> measures, std::vector<double> weights);
  double value(const Eigen::VectorXd& phi) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& phi) const override;

 private:
  Eigen::MatrixXd cost_;
  std::vector<Eigen::VectorXd> measures_;
  std::vector<double> weights_;
};

// 1-D only. The weighted W2^2 average equals W2^2 to the measure whose
// quantile function is the weighted mean of the quantile functions, plus a
// constant, so everything reduces to one piecewise constant quantile curve.
class QuantileTransportTerm : public TransportTerm {
 public:
  QuantileTransportTerm(const Grid& grid, const std::vector<Eigen::VectorXd>& measures,
                        const std::vector<double>& weights);
  double value(const Eigen::VectorXd& phi) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& phi) const override;

  std::size_t pieces() const { return values_.size(); }

  // Exact minimizer of value + lambda R. Optimality ties neighbouring masses
  // through the mean quantile at their shared boundary, so the first mass
  // fixes the rest; shoot on it and pin boundaries that sit on a jump.
  Eigen::VectorXd entropic_minimizer(double lambda) const;

 private:
  struct Shot {
    std::vector<double> mass;
    std::vector<std::size_t> pieces;  // mean quantile piece at each boundary
    double total = 0.0;
  };
  Shot shoot(std::size_t first, double start, double m, double lambda) const;
  double log_ratio(std::size_t j, double y, double lambda) const;
  std::size_t piece(double level) const;
  double integral(double level) const;         // of the mean quantile
  double integral_squared(double level) const;  // of its square
  std::vector<double> x_;
  std::vector<double> levels_;  // levels_[k] is the left end of piece k
  std::vector<double> values_;
  std::vector<double> prefix_, prefix_sq_;
  double constant_ = 0.0;
};

enum class TransportRoute { Auto, Exact, Quantile };

struct BarycenterOptions {
  double tol = 1e-12;
  double step0 = 1.0;
  std::size_t max_iter = 100000;
  TransportRoute route = TransportRoute::Auto;
};

struct BarycenterResult {
  Eigen::VectorXd weights;
  double objective = 0.0;
  std::size_t iterations = 0;
};

std::unique_ptr<TransportTerm> make_transport_term(const Grid& grid, const std::vector<Eigen::VectorXd>& measures,
                                                   const std::vector<double>& weights, TransportRoute route);

// Exact on the quantile route, mirror descent in the entropy geometry otherwise.
BarycenterResult entropic_barycenter_solve(const std::vector<Eigen::VectorXd>& measures,
                                           const std::vector<double>& weights, double lambda, const Grid& grid,
                                           const BarycenterOptions& options = {});
BarycenterResult entropic_barycenter_solve(const TransportTerm& term, double lambda, const Grid& grid,
                                           const BarycenterOptions& options = {});

Eigen::VectorXd random_dirichlet(std::size_t k, double alpha, Rng& rng);

VerifyResult verify_entropic_quadruple(const Grid& grid, std::size_t n_quadruples, Rng& rng, double tol = 1e-8);

// modulus * |phi - phi_hat|_1^2 <= J(phi) - J(phi_hat) + 2 eps over random densities.
VerifyResult verify_entropic_strong_convexity(const TransportTerm& term, double lambda, const Grid& grid,
                                              const Eigen::VectorXd& phi_hat, double eps_solver,
                                              std::size_t n_densities, double modulus, Rng& rng);

// ------------------------------------------------------ the estimation problem

struct EntropicConfig {
  std::size_t nodes = 64;
  double lambda = 0.1;
  std::size_t pool_size = 32;  // mu is uniform over this many fixed random measures
  std::size_t bumps = 3;
  double width_min = 0.03;
  double width_max = 0.15;
  double dirichlet_alpha = 1.0;
  std::uint64_t pool_seed = 20240605;
  double solver_tol = 1e-12;
  double step0 = 1.0;
};

class EntropicBarycenterProblem : public EstimationProblem {
 public:
  explicit EntropicBarycenterProblem(EntropicConfig cfg);

  std::string name() const override { return "entropic"; }
  SampleBatch sample(Rng& rng, std::size_t n) const override;
  PointSet solve_empirical(const SampleBatch& batch) const override;
  PointSet true_minimizers() const override { return PointSet{phi_star_}; }
  double distance(const Point& p, const Point& q) const override { return (p - q).lpNorm<1>(); }
  ConcentrationParams params() const override;

  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
  const std::vector<Eigen::VectorXd>& pool() const { return pool_; }
  const EntropicConfig& config() const { return cfg_; }
  const Eigen::VectorXd& population_barycenter() const { return phi_star_; }
  BarycenterOptions solver_options() const;

 private:
  EntropicConfig cfg_;
  std::shared_ptr<const Grid> grid_;
  std::vector<Eigen::VectorXd> pool_;
  Eigen::VectorXd phi_star_;
};

}  // namespace ermc
