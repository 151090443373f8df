#include "ermc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ermc {

// ------------------------------------------------------------------- grids

Grid::Grid(std::vector<std::vector<double>> axes, double cell_volume)
    : axes_(std::move(axes)), cell_volume_(cell_volume) {
  std::size_t total = 1;
  for (const auto& ax : axes_) {
    if (ax.empty()) throw std::invalid_argument("grid axis without nodes");
    for (std::size_t i = 1; i < ax.size(); ++i)
      if (!(ax[i] > ax[i - 1])) throw std::invalid_argument("grid nodes must be strictly increasing");
    total *= ax.size();
  }
  const auto dim = static_cast<Eigen::Index>(axes_.size());
  nodes_.resize(static_cast<Eigen::Index>(total), dim);
  // first axis varies fastest
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      nodes_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(a)) = axes_[a][rem % axes_[a].size()];
      rem /= axes_[a].size();
    }
  }
  double d2 = 0.0;
  for (const auto& ax : axes_) d2 += (ax.back() - ax.front()) * (ax.back() - ax.front());
  diameter_ = std::sqrt(d2);
}

Grid Grid::uniform_1d(std::size_t nodes, double lo, double hi) {
  if (nodes < 1 || !(hi > lo)) throw std::invalid_argument("bad 1-D grid");
  const double h = (hi - lo) / static_cast<double>(nodes);
  std::vector<double> ax(nodes);
  for (std::size_t i = 0; i < nodes; ++i) ax[i] = lo + (static_cast<double>(i) + 0.5) * h;
  return Grid({ax}, h);
}

Grid Grid::uniform_2d(std::size_t nx, std::size_t ny, double lo, double hi) {
  if (nx < 1 || ny < 1 || !(hi > lo)) throw std::invalid_argument("bad 2-D grid");
  const double hx = (hi - lo) / static_cast<double>(nx), hy = (hi - lo) / static_cast<double>(ny);
  std::vector<double> ax(nx), ay(ny);
  for (std::size_t i = 0; i < nx; ++i) ax[i] = lo + (static_cast<double>(i) + 0.5) * hx;
  for (std::size_t i = 0; i < ny; ++i) ay[i] = lo + (static_cast<double>(i) + 0.5) * hy;
  return Grid({ax, ay}, hx * hy);
}

Eigen::MatrixXd Grid::squared_distances() const {
  const auto n = nodes_.rows();
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) c(i, j) = (nodes_.row(i) - nodes_.row(j)).squaredNorm();
  return c;
}

DiscreteDensity DiscreteDensity::make(std::shared_ptr<const Grid> grid, Eigen::VectorXd weights) {
  if (!grid) throw std::invalid_argument("density without grid");
  if (static_cast<std::size_t>(weights.size()) != grid->size()) throw std::invalid_argument("density size != grid size");
  if (!weights.allFinite() || (weights.array() < 0.0).any()) throw std::invalid_argument("density weights must be >= 0");
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw std::invalid_argument("density weights must sum to 1");
  return DiscreteDensity{std::move(grid), std::move(weights)};
}

// ------------------------------------------------------ transportation simplex

namespace {

struct Cell {
  int i, j;
  double flow;
};

class TransportSimplex {
 public:
  TransportSimplex(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& c)
      : a_(a), b_(b), c_(c), m_(static_cast<int>(a.size())), n_(static_cast<int>(b.size())),
        where_(Eigen::MatrixXi::Constant(m_, n_, -1)), adj_(m_ + n_), pot_(m_ + n_) {}

  TransportPlan solve() {
    north_west_corner();
    const double eps = 1e-12 * std::max(c_.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const std::size_t max_pivots = 100 * static_cast<std::size_t>(m_ + n_) + 10000;
    std::size_t pivots = 0;
    while (true) {
      potentials();
      int ei = -1, ej = -1;
      if (!price(eps, ei, ej)) break;
      if (++pivots > max_pivots) throw std::runtime_error("transport simplex exceeded its pivot budget");
      pivot(ei, ej);
    }
    TransportPlan plan;
    plan.pivots = pivots;
    plan.coupling = Eigen::MatrixXd::Zero(m_, n_);
    for (const auto& cell : cells_) {
      plan.coupling(cell.i, cell.j) = cell.flow;
      plan.cost += cell.flow * c_(cell.i, cell.j);
    }
    plan.u = pot_.head(m_);
    plan.v = pot_.tail(n_);
    plan.dual_value = a_.dot(plan.u) + b_.dot(plan.v);
    return plan;
  }

 private:
  void add_cell(int i, int j, double flow) {
    where_(i, j) = static_cast<int>(cells_.size());
    adj_[i].push_back(static_cast<int>(cells_.size()));
    adj_[m_ + j].push_back(static_cast<int>(cells_.size()));
    cells_.push_back({i, j, flow});
  }

  // Yields a spanning tree of m + n - 1 cells; degenerate steps add zero flows.
  void north_west_corner() {
    std::vector<double> ra(a_.data(), a_.data() + m_), rb(b_.data(), b_.data() + n_);
    int i = 0, j = 0;
    while (true) {
      const double x = std::min(ra[i], rb[j]);
      add_cell(i, j, std::max(x, 0.0));
      ra[i] -= x;
      rb[j] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) ++j;
      else if (j == n_ - 1) ++i;
      else if (ra[i] <= rb[j]) ++i;
      else ++j;
    }
  }

  void potentials() {
    std::vector<char> seen(m_ + n_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    pot_(0) = 0.0;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (int idx : adj_[node]) {
        const auto& cell = cells_[idx];
        const int other = node < m_ ? m_ + cell.j : cell.i;
        if (seen[other]) continue;
        seen[other] = 1;
        pot_(other) = c_(cell.i, cell.j) - pot_(node);
        stack.push_back(other);
      }
    }
  }

  // Block pricing: first block holding a negative reduced cost, most negative within it.
  bool price(double eps, int& ei, int& ej) {
    const long total = static_cast<long>(m_) * n_;
    const long block = std::max<long>(64, static_cast<long>(std::sqrt(static_cast<double>(total))));
    double best = -eps;
    long scanned = 0;
    while (scanned < total) {
      const long end = std::min(total, scanned + block);
      for (; scanned < end; ++scanned) {
        const long k = (cursor_ + scanned) % total;
        const int i = static_cast<int>(k / n_), j = static_cast<int>(k % n_);
        if (where_(i, j) >= 0) continue;
        const double r = c_(i, j) - pot_(i) - pot_(m_ + j);
        if (r < best) {
          best = r;
          ei = i;
          ej = j;
        }
      }
      if (ei >= 0) {
        cursor_ = (cursor_ + scanned) % total;
        return true;
      }
    }
    return false;
  }

  void pivot(int ei, int ej) {
    // tree path from row ei to column ej
    const int target = m_ + ej;
    std::vector<int> parent_edge(m_ + n_, -1);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<int> stack{ei};
    seen[ei] = 1;
    while (!stack.empty() && !seen[target]) {
      const int node = stack.back();
      stack.pop_back();
      for (int idx : adj_[node]) {
        const auto& cell = cells_[idx];
        const int other = node < m_ ? m_ + cell.j : cell.i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_edge[other] = idx;
        stack.push_back(other);
      }
    }
    // walk back from the column: edges alternate -, +, -, ...
    std::vector<int> path;
    for (int node = target; node != ei;) {
      const int idx = parent_edge[node];
      path.push_back(idx);
      const auto& cell = cells_[idx];
      node = node < m_ ? m_ + cell.j : cell.i;
    }
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      if (cells_[path[k]].flow < theta) {
        theta = cells_[path[k]].flow;
        leave = path[k];
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t k = 0; k < path.size(); ++k) {
      auto& f = cells_[path[k]].flow;
      f = k % 2 == 0 ? std::max(f - theta, 0.0) : f + theta;
    }
    // the entering cell takes the leaving cell's slot
    auto& old = cells_[leave];
    where_(old.i, old.j) = -1;
    auto drop = [leave](std::vector<int>& v) { v.erase(std::find(v.begin(), v.end(), leave)); };
    drop(adj_[old.i]);
    drop(adj_[m_ + old.j]);
    old = {ei, ej, theta};
    where_(ei, ej) = leave;
    adj_[ei].push_back(leave);
    adj_[m_ + ej].push_back(leave);
  }

  const Eigen::VectorXd& a_;
  const Eigen::VectorXd& b_;
  const Eigen::MatrixXd& c_;
  int m_, n_;
  Eigen::MatrixXi where_;
  std::vector<std::vector<int>> adj_;
  std::vector<Cell> cells_;
  Eigen::VectorXd pot_;
  long cursor_ = 0;
};

}  // namespace

TransportPlan transport_lp(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("empty marginal");
  if (cost.rows() != a.size() || cost.cols() != b.size()) throw std::invalid_argument("cost matrix shape mismatch");
  if (!a.allFinite() || !b.allFinite() || (a.array() < 0.0).any() || (b.array() < 0.0).any())
    throw std::invalid_argument("marginals must be finite and >= 0");
  if (std::abs(a.sum() - b.sum()) > 1e-9) throw std::invalid_argument("infeasible marginals: total masses differ");
  return TransportSimplex(a, b, cost).solve();
}

TransportPlan w2_exact(const DiscreteDensity& a, const DiscreteDensity& b) {
  if (!a.grid || !b.grid) throw std::invalid_argument("density without grid");
  if (a.grid->size() + b.grid->size() > 2000) throw std::invalid_argument("support too large for exact transport");
  if (a.grid->dimension() != b.grid->dimension()) throw std::invalid_argument("densities live in different spaces");
  const auto& xa = a.grid->nodes();
  const auto& xb = b.grid->nodes();
  Eigen::MatrixXd c(xa.rows(), xb.rows());
  for (Eigen::Index j = 0; j < xb.rows(); ++j)
    for (Eigen::Index i = 0; i < xa.rows(); ++i) c(i, j) = (xa.row(i) - xb.row(j)).squaredNorm();
  return transport_lp(a.weights, b.weights, c);
}

double negative_entropy(const Eigen::VectorXd& weights, const Grid& grid) {
  const double h = grid.cell_volume();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights(i) > 0.0)) throw std::invalid_argument("entropy undefined: nonpositive density");
    const double f = weights(i) / h;
    acc += h * (f * (std::log(f) - 1.0) + 1.0);
  }
  return acc;
}

double entropic_objective(const DiscreteDensity& phi, const std::vector<DiscreteDensity>& measures,
                          const std::vector<double>& weights, double lambda) {
  if (measures.size() != weights.size() || measures.empty()) throw std::invalid_argument("measures/weights mismatch");
  double total = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < measures.size(); ++i) {
    total += 0.5 * weights[i] * w2_exact(phi, measures[i]).cost;
    wsum += weights[i];
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw std::invalid_argument("barycenter weights must sum to 1");
  return total + lambda * negative_entropy(phi.weights, *phi.grid);
}

Eigen::VectorXd random_dirichlet(std::size_t k, double alpha, Rng& rng) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.gamma(alpha);
  return w / w.sum();
}

VerifyResult verify_entropic_quadruple(const Grid& grid, std::size_t n_quadruples, Rng& rng, double tol) {
  auto g = std::make_shared<const Grid>(grid);
  const double diam = grid.diameter();
  VerifyResult r;
  r.tolerance = tol;
  r.max_violation = -std::numeric_limits<double>::infinity();
  auto draw = [&] {
    Eigen::VectorXd w = random_dirichlet(grid.size(), 1.0, rng);
    w /= w.sum();
    return DiscreteDensity{g, w};
  };
  auto half_w2 = [](const DiscreteDensity& a, const DiscreteDensity& b) { return 0.5 * w2_exact(a, b).cost; };
  for (std::size_t k = 0; k < n_quadruples; ++k) {
    const auto phi0 = draw(), phi1 = draw(), psi0 = draw(), psi1 = draw();
    const double lhs = half_w2(phi0, psi0) - half_w2(phi1, psi0) + half_w2(phi1, psi1) - half_w2(phi0, psi1);
    const double rhs = 4.0 * diam * diam * (phi0.weights - phi1.weights).lpNorm<1>();
    r.max_violation = std::max(r.max_violation, lhs - rhs);
    ++r.checked;
  }
  if (r.checked == 0) r.max_violation = 0.0;
  r.pass = r.max_violation <= tol;
  return r;
}

}  // namespace ermc
