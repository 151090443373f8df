#include "ermc/hoffman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/SVD>

namespace ermc {

namespace {

// Visits every subset of {0..rows-1} with 1..kmax elements in lexicographic order.
template <class Fn>
void for_each_subset(int rows, int kmax, Fn&& fn) {
  std::vector<int> idx;
  for (int k = 1; k <= kmax; ++k) {
    idx.resize(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      fn(idx);
      int i = k - 1;
      while (i >= 0 && idx[i] == rows - k + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
}

}  // namespace

HoffmanResult hoffman_constant(const Eigen::MatrixXd& C) {
  const int rows = static_cast<int>(C.rows()), cols = static_cast<int>(C.cols());
  if (rows > kHoffmanRowCap) throw std::invalid_argument("enumeration too large");
  if (rows == 0 || cols == 0) throw std::invalid_argument("no full-row-rank subset");

  HoffmanResult best;
  // A subset with more rows than columns cannot have full row rank, so the
  // enumeration stops at |I| = cols without changing the maximum.
  Eigen::MatrixXd sub;
  for_each_subset(rows, std::min(rows, cols), [&](const std::vector<int>& idx) {
    ++best.n_subsets_checked;
    const int k = static_cast<int>(idx.size());
    sub.resize(k, cols);
    for (int i = 0; i < k; ++i) sub.row(i) = C.row(idx[i]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
    const auto& sv = svd.singularValues();
    if (sv(0) == 0.0 || sv(k - 1) <= 1e-10 * sv(0)) return;
    const double h = 1.0 / sv(k - 1);
    // ties keep the lexicographically smallest subset
    if (h > best.h || (h == best.h && (best.witness_subset.empty() || idx < best.witness_subset))) {
      best.h = h;
      best.witness_subset = idx;
    }
  });
  if (best.witness_subset.empty()) throw std::invalid_argument("no full-row-rank subset");
  return best;
}

LassoCertificate build_lasso_certificate(const Eigen::MatrixXd& A, double lambda) {
  const int q = static_cast<int>(A.cols()), p = static_cast<int>(A.rows());
  if (q < 1) throw std::invalid_argument("certificate needs q >= 1");
  if (q > 4) throw std::invalid_argument("certificate with q > 4 exceeds the Hoffman enumeration cap");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  const int signs = 1 << q;
  LassoCertificate cert;
  cert.q = q;
  cert.lambda = lambda;
  cert.matrix = Eigen::MatrixXd::Zero(signs + 1 + p + 1, q + 1);
  // row r: bit j set means coordinate j is -1, so row 0 is all +1
  for (int r = 0; r < signs; ++r) {
    for (int j = 0; j < q; ++j) cert.matrix(r, j) = (r >> j) & 1 ? -1.0 : 1.0;
    cert.matrix(r, q) = -1.0;
  }
  cert.matrix(signs, q) = 1.0;
  cert.matrix.block(signs + 1, 0, p, q) = A;
  cert.matrix(signs + 1 + p, q) = lambda;
  return cert;
}

double lasso_tau_lower_bound(double H, double lambda, double R, double norm_A, double ev2) {
  if (!(H > 0.0) || !(lambda > 0.0) || !(R > 0.0) || !(norm_A > 0.0) || !(ev2 > 0.0))
    throw std::invalid_argument("tau lower bound needs positive inputs");
  const double sv = std::sqrt(ev2);
  return 1.0 / (4.0 * H * H * (1.0 + lambda * R + (R * norm_A + sv) * (4.0 * R * norm_A + sv)));
}

LassoRates lasso_assumption_rates(double psi2_theta, double psi2_v, double l2_v, std::size_t m, double H,
                                  double cov_norm) {
  if (!(psi2_theta > 0.0) || !(psi2_v > 0.0) || !(l2_v > 0.0) || m == 0 || !(H > 0.0) || !(cov_norm > 0.0))
    throw std::invalid_argument("rate constants need positive inputs");
  const double e = std::numbers::e, r2 = std::numbers::sqrt2 - 1.0;
  const double v2 = l2_v * l2_v, v4 = v2 * v2;
  const double pv2 = psi2_v * psi2_v, pv4 = pv2 * pv2;
  const double pt2 = psi2_theta * psi2_theta, pt4 = pt2 * pt2;
  const double mm = static_cast<double>(m);

  LassoRates r;
  r.c1 = v4 / (2.0 * (e * e * pv4 + e * pv2 * v2));
  const double c = std::min(r2 / std::numbers::sqrt2 / (H * H), r2 * cov_norm);
  const double first = r2 * r2 * v4 / (2.0 * (e * e * pv4 + e * pv2 * r2 * v2));
  const double second = c * c / (2.0 * (e * e * mm * mm * pt4 + e * mm * pt2 * c));
  r.c2 = std::min(first, second);
  r.eta = RateFunction::exponential(2.0, r.c1);
  r.kappa = RateFunction::exponential(mm, r.c2);
  return r;
}

}  // namespace ermc
