#include "ermc/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "ermc/errors.hpp"
#include "ermc/parallel.hpp"

namespace ermc {

std::string to_string(OrliczMethod m) {
  return m == OrliczMethod::EmpiricalBisection ? "empirical-bisection" : "closed-form";
}

OrliczEstimate psi_norm_empirical(std::span<const double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("psi norm of an empty sample");
  if (!(q >= 1.0)) throw std::invalid_argument("psi norm needs q >= 1");
  double s = 0.0;
  for (double x : samples) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite sample in psi norm estimate");
    s = std::max(s, std::abs(x));
  }
  OrliczEstimate est{q, 0.0, samples.size(), OrliczMethod::EmpiricalBisection};
  if (s == 0.0) return est;

  // Work on |x|/max|x| so the answer is exactly homogeneous in the scale.
  std::vector<double> zq(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) zq[i] = std::pow(std::abs(samples[i]) / s, q);
  auto mean_exp = [&](double c) {
    const double inv = 1.0 / std::pow(c, q);
    double acc = 0.0;
    for (double z : zq) acc += std::exp(z * inv);
    return acc / static_cast<double>(zq.size());
  };

  // mean_exp(hi) <= 2 always holds at hi = 1/ln(2)^{1/q}; lo = hi/64 gives > 2.
  double hi = 1.0 / std::pow(std::numbers::ln2, 1.0 / q);
  double lo = hi / 64.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_exp(mid) > 2.0 ? lo : hi) = mid;
  }
  est.value = s * hi;
  return est;
}

OrliczEstimate psi_norm_from_expectation(const std::function<double(double)>& expect_exp, double q, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("psi norm closed form needs a positive scale hint");
  auto g = [&](double c) { return expect_exp(c) - 2.0; };
  // g decreases in c and may be infinite below the root; bisection copes with that
  double lo = scale, hi = scale;
  if (g(scale) > 0.0) {
    while (!(g(hi) <= 0.0)) {
      lo = hi;
      hi *= 2.0;
    }
  } else {
    while (!(g(lo) > 0.0)) {
      hi = lo;
      lo *= 0.5;
    }
  }
  if (g(hi) == 0.0) return {q, hi, 0, OrliczMethod::ClosedForm};
  auto [a, b] = boost::math::tools::bisect(g, lo, hi, boost::math::tools::eps_tolerance<double>(52));
  return {q, 0.5 * (a + b), 0, OrliczMethod::ClosedForm};
}

OrliczEstimate psi_norm_constant(double c, double q) {
  return {q, std::abs(c) / std::pow(std::numbers::ln2, 1.0 / q), 0, OrliczMethod::ClosedForm};
}

OrliczEstimate psi2_gaussian(double sd) {
  // E exp(X^2/c^2) = (1 - 2 sd^2/c^2)^{-1/2} = 2
  return {2.0, std::abs(sd) * std::sqrt(8.0 / 3.0), 0, OrliczMethod::ClosedForm};
}

OrliczEstimate psi1_exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be > 0");
  return {1.0, 2.0 / rate, 0, OrliczMethod::ClosedForm};
}

OrliczEstimate psi1_uniform_abs(double width) {
  if (!(width > 0.0)) throw std::invalid_argument("uniform width must be > 0");
  // E exp(X/c) = (c/w)(e^{w/c} - 1)
  return psi_norm_from_expectation([width](double c) { return c / width * std::expm1(width / c); }, 1.0, width);
}

double sub_gamma_tail(const SubGammaParams& p, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("tail evaluated at negative t");
  if (p.variance_factor < 0.0 || p.scale < 0.0) throw std::invalid_argument("sub-gamma parameters must be >= 0");
  if (t == 0.0) return 1.0;
  const double den = 2.0 * (p.variance_factor + p.scale * t);
  if (den == 0.0) return 0.0;
  return std::clamp(std::exp(-t * t / den), 0.0, 1.0);
}

double sub_gamma_quantile(const SubGammaParams& p, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
  const double ell = std::log(1.0 / delta);
  return std::sqrt(2.0 * p.variance_factor * ell) + p.scale * ell;
}

double matrix_bernstein_tail(std::size_t d, double n, double psi2, double t) {
  if (d < 1 || !(n >= 1.0) || !(psi2 > 0.0) || !(t >= 0.0))
    throw std::invalid_argument("matrix Bernstein needs d >= 1, n >= 1, psi2 > 0, t >= 0");
  const double e = std::numbers::e, dd = static_cast<double>(d), p2 = psi2 * psi2;
  const double bound = dd * std::exp(-n * t * t / (2.0 * (e * e * dd * dd * p2 * p2 + e * dd * p2 * t)));
  return std::min(1.0, bound);
}

double mcdiarmid_extended_bound(std::size_t n, double psi1_b, double p, double delta) {
  if (p > 0.75) throw RegimeError("outside theorem regime: p > 3/4");
  if (!(p >= 0.0) || !(psi1_b >= 0.0)) throw std::invalid_argument("p and psi1_b must be >= 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
  const double nn = static_cast<double>(n), ell = std::log(1.0 / delta);
  return 4.0 * nn * psi1_b * std::sqrt(p) + std::numbers::e * psi1_b * (2.0 * std::sqrt(nn * ell) + ell);
}

double mcdiarmid_extended_tail(std::size_t n, double psi1_b, double p, double t) {
  if (p > 0.75) throw RegimeError("outside theorem regime: p > 3/4");
  const double nn = static_cast<double>(n);
  const double r = t - 4.0 * nn * psi1_b * std::sqrt(p);
  if (r <= 0.0) return 1.0;
  if (psi1_b == 0.0) return std::clamp(p, 0.0, 1.0);
  // e b (2 sqrt(n l) + l) = r, solved for sqrt(l)
  const double s = -std::sqrt(nn) + std::sqrt(nn + r / (std::numbers::e * psi1_b));
  return std::clamp(p + std::exp(-s * s), 0.0, 1.0);
}

double bernstein_mcdiarmid_bound(double sigma, double M, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
  const double ell = std::log(1.0 / delta);
  return std::numbers::e * (2.0 * sigma * std::sqrt(ell) + M * ell);
}

double bernstein_mcdiarmid_tail(double sigma, double M, double t) {
  if (t <= 0.0) return 1.0;
  const double e = std::numbers::e;
  double s;
  if (M == 0.0) {
    if (sigma == 0.0) return 0.0;
    s = t / (2.0 * e * sigma);
  } else {
    s = (-2.0 * e * sigma + std::sqrt(4.0 * e * e * sigma * sigma + 4.0 * e * M * t)) / (2.0 * e * M);
  }
  return std::clamp(std::exp(-s * s), 0.0, 1.0);
}

double dkw_margin(std::size_t reps, double confidence) {
  if (reps == 0) throw std::invalid_argument("DKW margin needs reps > 0");
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(reps)));
}

namespace {

// One draw of f, conditioned on the good set by rejection.
double draw_f(const McDiarmidExperiment& ex, Rng& rng, std::vector<double>& x) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (auto& xi : x) xi = ex.sampler(rng);
    if (!ex.good_set || ex.good_set(x)) return ex.f(x);
  }
  throw std::runtime_error("good set is practically never hit");
}

}  // namespace

TailTable mcdiarmid_simulate(const McDiarmidExperiment& ex, std::size_t reps, const std::vector<double>& t_grid,
                             const RngSpec& spec, unsigned threads) {
  if (reps < 1000) throw std::invalid_argument("mcdiarmid_simulate needs reps >= 1000");
  if (ex.n == 0 || !ex.sampler || !ex.f || !ex.bound_tail) throw std::invalid_argument("incomplete McDiarmid setup");

  // Test replications run unconditioned; the reference is the conditional
  // mean from a separate batch.
  std::vector<double> values(reps), ref_values(reps);
  const RngSpec test_spec = spec.child(0), ref_spec = spec.child(1);
  McDiarmidExperiment unconditioned = ex;
  unconditioned.good_set = nullptr;
  parallel_for(reps, threads, [&](std::size_t i) {
    std::vector<double> x(ex.n);
    Rng rng(RngSpec{derive_seed(test_spec), i});
    values[i] = draw_f(unconditioned, rng, x);
    Rng ref_rng(RngSpec{derive_seed(ref_spec), i});
    ref_values[i] = draw_f(ex, ref_rng, x);
  });

  TailTable table;
  table.reps = reps;
  double acc = 0.0;
  for (double v : ref_values) acc += v;
  table.reference = acc / static_cast<double>(reps);
  const double margin = dkw_margin(reps);
  for (double t : t_grid) {
    std::size_t exceed = 0;
    for (double v : values) exceed += (v - table.reference > t);
    TailRow row;
    row.t = t;
    row.empirical = static_cast<double>(exceed) / static_cast<double>(reps);
    row.bound = std::clamp(ex.bound_tail(t), 0.0, 1.0);
    row.margin = margin;
    row.pass = row.empirical <= row.bound + margin;
    table.all_pass = table.all_pass && row.pass;
    table.rows.push_back(row);
  }
  return table;
}

McDiarmidExperiment uniform_mean_experiment(std::size_t n) {
  McDiarmidExperiment ex;
  ex.n = n;
  ex.sampler = [](Rng& rng) { return rng.uniform(); };
  ex.f = [](const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc / static_cast<double>(x.size());
  };
  // f_k = (U - 1/2)/n, so sigma^2 = n (psi/n)^2 and M = psi/n.
  const double psi = psi1_uniform_abs(0.5).value;
  const double nn = static_cast<double>(n);
  const double sigma = psi / std::sqrt(nn), M = psi / nn;
  ex.bound_tail = [sigma, M](double t) { return bernstein_mcdiarmid_tail(sigma, M, t); };
  return ex;
}

McDiarmidExperiment uniform_mean_bad_set_experiment(std::size_t n, double p_bad) {
  if (!(p_bad > 0.0 && p_bad <= 0.75)) throw std::invalid_argument("bad-set probability must lie in (0, 3/4]");
  McDiarmidExperiment ex = uniform_mean_experiment(n);
  const double nn = static_cast<double>(n);
  const double thr = std::pow(1.0 - p_bad, 1.0 / nn);
  ex.good_set = [thr](const std::vector<double>& x) {
    return std::all_of(x.begin(), x.end(), [thr](double v) { return v <= thr; });
  };
  // |U - U'| has density 2(1 - z) on [0, 1]; b caps it at thr.
  auto expect_exp = [thr](double c) {
    auto integrand = [c](double z) { return 2.0 * (1.0 - z) * std::exp(z / c); };
    const double body = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, thr, 15, 1e-13);
    return body + (1.0 - thr) * (1.0 - thr) * std::exp(thr / c);
  };
  const double psi_b = psi_norm_from_expectation(expect_exp, 1.0, 0.5).value / nn;
  ex.bound_tail = [n, psi_b, p_bad](double t) { return mcdiarmid_extended_tail(n, psi_b, p_bad, t); };
  return ex;
}

}  // namespace ermc
