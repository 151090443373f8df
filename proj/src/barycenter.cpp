#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ermc/errors.hpp"
#include "ermc/transport.hpp"

namespace ermc {

namespace {

void check_weights(const std::vector<Eigen::VectorXd>& measures, const std::vector<double>& weights,
                   std::size_t nodes) {
  if (measures.empty() || measures.size() != weights.size()) throw std::invalid_argument("measures/weights mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < measures.size(); ++i) {
    if (static_cast<std::size_t>(measures[i].size()) != nodes) throw std::invalid_argument("measure not on the grid");
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("barycenter weights must be >= 0");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("barycenter weights must sum to 1");
}

}  // namespace

ExactTransportTerm::ExactTransportTerm(const Grid& grid, std::vector<Eigen::VectorXd> measures,
                                       std::vector<double> weights)
    : cost_(grid.squared_distances()), measures_(std::move(measures)), weights_(std::move(weights)) {
  check_weights(measures_, weights_, grid.size());
}

double ExactTransportTerm::value(const Eigen::VectorXd& phi) const {
  double total = 0.0;
  for (std::size_t i = 0; i < measures_.size(); ++i) total += 0.5 * weights_[i] * transport_lp(phi, measures_[i], cost_).cost;
  return total;
}

Eigen::VectorXd ExactTransportTerm::gradient(const Eigen::VectorXd& phi) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(phi.size());
  for (std::size_t i = 0; i < measures_.size(); ++i) g += 0.5 * weights_[i] * transport_lp(phi, measures_[i], cost_).u;
  return g;
}

QuantileTransportTerm::QuantileTransportTerm(const Grid& grid, const std::vector<Eigen::VectorXd>& measures,
                                             const std::vector<double>& weights) {
  if (grid.dimension() != 1) throw std::invalid_argument("quantile route needs a 1-D grid");
  check_weights(measures, weights, grid.size());
  x_ = grid.axes()[0];
  const std::size_t N = x_.size();

  // Each measure's quantile function jumps from node k to the next charged
  // node once the level passes its CDF at k.
  std::vector<std::pair<double, double>> events;
  double start = 0.0, second_moment = 0.0;
  for (std::size_t i = 0; i < measures.size(); ++i) {
    const auto& w = measures[i];
    const double total = w.sum();
    if (!(total > 0.0)) throw std::invalid_argument("measure without mass");
    std::size_t k = 0;
    while (k < N && !(w(k) > 0.0)) ++k;
    start += weights[i] * x_[k];
    double cdf = 0.0;
    for (; k < N;) {
      cdf += w(k) / total;
      second_moment += weights[i] * w(k) / total * x_[k] * x_[k];
      std::size_t next = k + 1;
      while (next < N && !(w(next) > 0.0)) ++next;
      if (next == N) break;
      if (cdf < 1.0) events.emplace_back(cdf, weights[i] * (x_[next] - x_[k]));
      k = next;
    }
  }
  std::sort(events.begin(), events.end());

  levels_.push_back(0.0);
  values_.push_back(start);
  for (const auto& [level, jump] : events) {
    if (level == levels_.back()) {
      values_.back() += jump;
    } else {
      levels_.push_back(level);
      values_.push_back(values_.back() + jump);
    }
  }
  prefix_.assign(levels_.size() + 1, 0.0);
  prefix_sq_.assign(levels_.size() + 1, 0.0);
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    const double right = k + 1 < levels_.size() ? levels_[k + 1] : 1.0;
    prefix_[k + 1] = prefix_[k] + values_[k] * (right - levels_[k]);
    prefix_sq_[k + 1] = prefix_sq_[k] + values_[k] * values_[k] * (right - levels_[k]);
  }
  constant_ = second_moment - prefix_sq_.back();
}

std::size_t QuantileTransportTerm::piece(double level) const {
  auto it = std::upper_bound(levels_.begin(), levels_.end(), level);
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - levels_.begin()) - 1));
}

double QuantileTransportTerm::integral(double level) const {
  if (level >= 1.0) return prefix_.back();
  const auto k = piece(level);
  return prefix_[k] + values_[k] * (level - levels_[k]);
}

double QuantileTransportTerm::integral_squared(double level) const {
  if (level >= 1.0) return prefix_sq_.back();
  const auto k = piece(level);
  return prefix_sq_[k] + values_[k] * values_[k] * (level - levels_[k]);
}

double QuantileTransportTerm::value(const Eigen::VectorXd& phi) const {
  // W2^2(phi, mean quantile) = sum_j int_{F_{j-1}}^{F_j} (x_j - Qbar)^2
  const double total = phi.sum();
  double w2 = 0.0, cdf = 0.0, g_prev = 0.0, h_prev = 0.0;
  for (std::size_t j = 0; j < x_.size(); ++j) {
    const double w = phi(static_cast<Eigen::Index>(j)) / total;
    cdf = j + 1 == x_.size() ? 1.0 : cdf + w;
    const double g = integral(cdf), h = integral_squared(cdf);
    w2 += x_[j] * x_[j] * w - 2.0 * x_[j] * (g - g_prev) + (h - h_prev);
    g_prev = g;
    h_prev = h;
  }
  return 0.5 * (std::max(w2, 0.0) + constant_);
}

Eigen::VectorXd QuantileTransportTerm::gradient(const Eigen::VectorXd& phi) const {
  const double total = phi.sum();
  Eigen::VectorXd zeta(phi.size());
  zeta(0) = 0.0;
  double cdf = 0.0;
  for (std::size_t j = 0; j + 1 < x_.size(); ++j) {
    cdf += phi(static_cast<Eigen::Index>(j)) / total;
    // Qbar at the boundary; the midpoint of the jump when it sits exactly there
    const auto k = piece(cdf);
    const double y = (cdf == levels_[k] && k > 0) ? 0.5 * (values_[k - 1] + values_[k]) : values_[k];
    const double a = x_[j + 1] - y, b = x_[j] - y;
    zeta(static_cast<Eigen::Index>(j + 1)) = zeta(static_cast<Eigen::Index>(j)) + 0.5 * (a * a - b * b);
  }
  return zeta;
}

double QuantileTransportTerm::log_ratio(std::size_t j, double y, double lambda) const {
  // log(phi_{j+1} / phi_j) when the mean quantile at their boundary is y
  const double a = x_[j + 1] - y, b = x_[j] - y;
  return -0.5 * (a * a - b * b) / lambda;
}

QuantileTransportTerm::Shot QuantileTransportTerm::shoot(std::size_t first, double start, double m,
                                                         double lambda) const {
  Shot s;
  s.mass.push_back(m);
  double c = start + m;
  for (std::size_t j = first; j + 1 < x_.size() && c <= 1.0; ++j) {
    const auto k = piece(c);
    s.pieces.push_back(k);
    s.mass.push_back(s.mass.back() * std::exp(log_ratio(j, values_[k], lambda)));
    c += s.mass.back();
  }
  s.total = c;
  return s;
}

Eigen::VectorXd QuantileTransportTerm::entropic_minimizer(double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  const std::size_t N = x_.size();
  Eigen::VectorXd phi(static_cast<Eigen::Index>(N));
  std::size_t first = 0;
  double start = 0.0, lo = 0.0, hi = 1.0;
  while (true) {
    if (first + 1 == N) {
      phi(static_cast<Eigen::Index>(first)) = 1.0 - start;
      break;
    }
    // the total mass is increasing in the first mass, with jumps whenever a
    // boundary crosses a jump of the mean quantile
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (shoot(first, start, mid, lambda).total < 1.0 ? lo : hi) = mid;
    }
    const Shot below = shoot(first, start, lo, lambda), above = shoot(first, start, hi, lambda);
    std::size_t t = 0;
    while (t < above.pieces.size() && below.pieces[t] == above.pieces[t]) ++t;
    if (t == above.pieces.size()) {
      for (std::size_t i = 0; i < below.mass.size(); ++i) phi(static_cast<Eigen::Index>(first + i)) = below.mass[i];
      break;
    }
    // boundary first + t is pinned to the jump; the neighbour ratio is free
    // within the jump and the rest is a smaller problem of the same kind
    const std::size_t k = below.pieces[t];
    double c = start;
    for (std::size_t i = 0; i <= t; ++i) {
      phi(static_cast<Eigen::Index>(first + i)) = below.mass[i];
      c += below.mass[i];
    }
    const std::size_t j = first + t;
    phi(static_cast<Eigen::Index>(j)) += levels_[k + 1] - c;
    const double m = phi(static_cast<Eigen::Index>(j));
    lo = m * std::exp(log_ratio(j, values_[k], lambda));
    hi = std::min(m * std::exp(log_ratio(j, values_[k + 1], lambda)), 1.0 - levels_[k + 1]);
    start = levels_[k + 1];
    first = j + 1;
  }
  return phi / phi.sum();
}

std::unique_ptr<TransportTerm> make_transport_term(const Grid& grid, const std::vector<Eigen::VectorXd>& measures,
                                                   const std::vector<double>& weights, TransportRoute route) {
  if (route == TransportRoute::Auto) route = grid.dimension() == 1 ? TransportRoute::Quantile : TransportRoute::Exact;
  if (route == TransportRoute::Quantile) return std::make_unique<QuantileTransportTerm>(grid, measures, weights);
  return std::make_unique<ExactTransportTerm>(grid, measures, weights);
}

BarycenterResult entropic_barycenter_solve(const std::vector<Eigen::VectorXd>& measures,
                                           const std::vector<double>& weights, double lambda, const Grid& grid,
                                           const BarycenterOptions& options) {
  auto term = make_transport_term(grid, measures, weights, options.route);
  return entropic_barycenter_solve(*term, lambda, grid, options);
}

BarycenterResult entropic_barycenter_solve(const TransportTerm& term, double lambda, const Grid& grid,
                                           const BarycenterOptions& options) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(options.tol > 0.0) || !(options.step0 >= 0.0)) throw std::invalid_argument("bad solver options");
  if (const auto* quantile = dynamic_cast<const QuantileTransportTerm*>(&term)) {
    Eigen::VectorXd w = quantile->entropic_minimizer(lambda);
    return {w, term.value(w) + lambda * negative_entropy(w, grid), 1};
  }
  const auto N = static_cast<Eigen::Index>(grid.size());
  const double h = grid.cell_volume(), floor = 1e-12 * h;

  auto objective = [&](const Eigen::VectorXd& w) { return term.value(w) + lambda * negative_entropy(w, grid); };
  auto normalize = [&](Eigen::VectorXd& w) {
    w /= w.sum();
    w = w.cwiseMax(floor);
    w /= w.sum();
  };

  Eigen::VectorXd w = Eigen::VectorXd::Constant(N, 1.0 / static_cast<double>(N));
  double J = objective(w);
  double eta = 1.0 / (lambda + options.step0);
  std::deque<double> history{J};

  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    Eigen::VectorXd g = term.gradient(w);
    for (Eigen::Index j = 0; j < N; ++j) g(j) += lambda * std::log(w(j) / h);
    Eigen::ArrayXd expo = -eta * g.array();
    expo -= expo.maxCoeff();
    Eigen::VectorXd cand = (w.array() * expo.exp()).matrix();
    normalize(cand);
    const double Jc = objective(cand);
    if (!(Jc <= J)) {
      eta *= 0.5;
      if (eta < 1e-30) return {w, J, it};
      continue;
    }
    w = std::move(cand);
    J = Jc;
    eta *= 1.25;
    history.push_back(J);
    if (history.size() > 11) history.pop_front();
    if (history.size() == 11 && history.front() - J < options.tol) return {w, J, it};
  }
  throw ConvergenceError("entropic barycenter solver did not converge", w);
}

VerifyResult verify_entropic_strong_convexity(const TransportTerm& term, double lambda, const Grid& grid,
                                              const Eigen::VectorXd& phi_hat, double eps_solver,
                                              std::size_t n_densities, double modulus, Rng& rng) {
  const double j_hat = term.value(phi_hat) + lambda * negative_entropy(phi_hat, grid);
  VerifyResult r;
  r.tolerance = 0.0;
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n_densities; ++k) {
    Eigen::VectorXd phi = random_dirichlet(grid.size(), 1.0, rng);
    // every other draw is pulled towards phi_hat, where the growth is tightest
    if (k % 2 == 1) {
      const double s = rng.uniform(0.01, 1.0);
      phi = s * phi + (1.0 - s) * phi_hat;
    }
    phi = phi.cwiseMax(1e-12 * grid.cell_volume());
    phi /= phi.sum();
    const double gap = term.value(phi) + lambda * negative_entropy(phi, grid) - j_hat;
    const double d = (phi - phi_hat).lpNorm<1>();
    r.max_violation = std::max(r.max_violation, modulus * d * d - gap - 2.0 * eps_solver);
    ++r.checked;
  }
  if (r.checked == 0) r.max_violation = 0.0;
  r.pass = r.max_violation <= 0.0;
  return r;
}

}  // namespace ermc
