#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "ermc/bounds.hpp"

namespace ermc {

struct HoffmanResult {
  double h = 0.0;
  std::vector<int> witness_subset;  // sorted row indices
  std::size_t n_subsets_checked = 0;
};

inline constexpr int kHoffmanRowCap = 22;

// max over full-row-rank row subsets I of 1 / sigma_min(C_I).
HoffmanResult hoffman_constant(const Eigen::MatrixXd& C);

struct LassoCertificate {
  Eigen::MatrixXd matrix;
  int q = 0;
  double lambda = 0.0;
};

// Rows: all 2^q sign vectors with trailing -1; (0, 1); [A, 0]; (0, lambda).
LassoCertificate build_lasso_certificate(const Eigen::MatrixXd& A, double lambda);

double lasso_tau_lower_bound(double H, double lambda, double R, double norm_A, double ev2);

struct LassoRates {
  double c1 = 0.0;  // eta(n) = 2 exp(-c1 n)
  double c2 = 0.0;  // kappa(n) = m exp(-c2 n)
  RateFunction eta;
  RateFunction kappa;
};

LassoRates lasso_assumption_rates(double psi2_theta, double psi2_v, double l2_v, std::size_t m, double H,
                                  double cov_norm);

}  // namespace ermc
