#include "ermc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ermc/errors.hpp"
#include "ermc/format.hpp"

namespace ermc {

RateFunction RateFunction::exponential(double coef, double rate) {
  if (!(coef >= 0.0) || !(rate >= 0.0) || !std::isfinite(coef) || !std::isfinite(rate))
    throw std::invalid_argument("rate function needs finite nonnegative coef and rate");
  RateFunction f;
  f.kind_ = Kind::Exponential;
  f.coef_ = coef;
  f.rate_ = rate;
  return f;
}

RateFunction RateFunction::table(std::map<std::size_t, double> values) {
  if (values.empty()) throw std::invalid_argument("empty rate table");
  for (auto& [n, v] : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("rate table values must be finite and >= 0");
  RateFunction f;
  f.kind_ = Kind::Table;
  f.table_ = std::move(values);
  return f;
}

double RateFunction::operator()(double n) const {
  if (kind_ == Kind::Exponential) return coef_ == 0.0 ? 0.0 : coef_ * std::exp(-rate_ * n);
  auto it = table_.find(static_cast<std::size_t>(std::llround(n)));
  if (it == table_.end() || static_cast<double>(it->first) != n)
    throw std::out_of_range("rate table has no entry for n = " + fmt_double(n));
  return it->second;
}

std::string RateFunction::to_string() const {
  if (kind_ == Kind::Exponential) {
    if (coef_ == 0.0) return "0";
    return "exp:" + fmt_double(coef_) + ":" + fmt_double(rate_);
  }
  std::string out = "table:";
  bool first = true;
  for (auto& [n, v] : table_) {
    if (!first) out += ";";
    first = false;
    out += std::to_string(n) + "=" + fmt_double(v);
  }
  return out;
}

RateFunction RateFunction::parse(const std::string& text) {
  if (text == "0") return zero();
  if (text.rfind("exp:", 0) == 0) {
    auto parts = split(text.substr(4), ':');
    if (parts.size() != 2) throw std::invalid_argument("expected exp:<coef>:<rate>, got '" + text + "'");
    return exponential(parse_double(parts[0]), parse_double(parts[1]));
  }
  if (text.rfind("table:", 0) == 0) {
    std::map<std::size_t, double> values;
    for (auto& entry : split(text.substr(6), ';')) {
      auto kv = split(entry, '=');
      if (kv.size() != 2) throw std::invalid_argument("bad rate table entry '" + entry + "'");
      values[static_cast<std::size_t>(std::stoull(kv[0]))] = parse_double(kv[1]);
    }
    return table(std::move(values));
  }
  throw std::invalid_argument("unrecognized rate function '" + text + "'");
}

double ConcentrationParams::p_n(double n) const { return std::clamp(p_n_raw(n), 0.0, 1.0); }

namespace {

void check_regime(const ConcentrationParams& p) {
  if (!(p.beta >= 1.0)) throw RegimeError("theorem regime violated: beta must be >= 1");
  if (!(p.alpha > 0.0)) throw RegimeError("theorem regime violated: alpha must be > 0");
  if (p.beta == p.alpha) throw RegimeError("theorem regime violated: beta == alpha is not covered");
  double gap = p.beta - p.alpha;
  if (!(gap > 0.0 && gap < 2.0)) throw RegimeError("theorem regime violated: beta - alpha must lie in (0, 2)");
  if (!(p.tau > 0.0)) throw RegimeError("theorem regime violated: tau must be > 0");
  if (!(p.psi1_a >= 0.0)) throw RegimeError("psi1 norm of a must be >= 0");
  if (!(p.diam_s >= 0.0)) throw RegimeError("diam_s must be >= 0");
}

void check_query(double n, double delta, double p_n) {
  if (!(n >= 1.0)) throw std::invalid_argument("n must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
  if (!(p_n >= 0.0)) throw std::invalid_argument("p_n must be >= 0");
  if (p_n > 0.75) throw RegimeError("outside theorem regime: p_n > 3/4");
}

}  // namespace

DerivedConstants derive_constants(const ConcentrationParams& p) {
  check_regime(p);
  const double b = p.beta, a = p.alpha, g = b - a;
  DerivedConstants dc;
  dc.q = std::min(g, 1.0);
  dc.Q = std::max(g, 1.0);
  dc.s = std::min(1.0, 2.0 / g - 1.0);
  dc.L = p.psi1_a / p.tau;
  dc.c1 = std::pow(4.0 * b / g, b / g);
  dc.c2 = 2.0 * std::pow(std::max(4.0 * a / g, 1.0), a / g);
  const double pre = std::pow(2.0, std::max(0.0, a - 1.0) + 2.0);
  const double diam_term = p.diam_s == 0.0 ? 0.0 : std::pow(p.diam_s, a);
  if (dc.L > 0.0) {
    dc.K = pre * (std::pow(dc.L, -a / g) * diam_term + dc.c2);
  } else {
    dc.K = diam_term > 0.0 ? INFINITY : pre * dc.c2;
  }
  // L^{b/g} K = pre (L diam^a + L^{b/g} c2)
  dc.LK = pre * (dc.L * diam_term + std::pow(dc.L, b / g) * dc.c2);
  return dc;
}

double theorem_constant_c(const ConcentrationParams& p, const DerivedConstants& dc, double n) {
  // C = L^{1/Q} K^{q/b} + L^{1/Q} 2^{2+1/Q} n^{1-1/Q}, with L^{1/Q}K^{q/b} = (L^{b/g} K)^{q/b}
  const double lq = std::pow(dc.L, 1.0 / dc.Q);
  return std::pow(dc.LK, dc.q / p.beta) + lq * std::pow(2.0, 2.0 + 1.0 / dc.Q) * std::pow(n, 1.0 - 1.0 / dc.Q);
}

BoundResult theorem_bound(const ConcentrationParams& p, const DerivedConstants& dc, const BoundQuery& query) {
  check_regime(p);
  const double n = static_cast<double>(query.n);
  check_query(n, query.delta, query.p_n);
  const double b = p.beta, a = p.alpha;
  const double ell = std::log(1.0 / query.delta);
  const double ns = std::pow(n, -dc.s);
  const double lq = std::pow(dc.L, 1.0 / dc.Q);

  BoundResult r;
  r.main_term = lq * (std::pow(dc.c1, dc.q / b) * std::pow(n, -a / (b * dc.Q)) +
                      std::pow(2.0, 1.0 / dc.Q) * std::numbers::e * (2.0 * std::sqrt(ns * ell) + ns * ell));
  r.C = theorem_constant_c(p, dc, n);
  r.p_term = query.p_n == 0.0 ? 0.0 : r.C * std::pow(query.p_n, dc.q / (2.0 * b));
  r.rhs = r.main_term + r.p_term;
  r.value = std::pow(r.rhs, 1.0 / dc.q);
  r.probability = std::clamp(1.0 - query.p_n - query.delta, 0.0, 1.0);
  return r;
}

double corollary_b2a1_probability(double L, double diam_s, double n, double delta, double p_n) {
  check_query(n, delta, p_n);
  if (!(L >= 0.0) || !(diam_s >= 0.0)) throw std::invalid_argument("L and diam_s must be >= 0");
  const double ell = std::log(1.0 / delta);
  return 8.0 * L * (1.0 / std::sqrt(n) + 2.0 * std::sqrt(ell / n) + ell / n) +
         (14.0 * L + 2.0 * std::sqrt(L * diam_s)) * std::pow(p_n, 0.25);
}

double expectation_bound(const ConcentrationParams& p, const DerivedConstants& dc, double n, double p_n) {
  check_regime(p);
  check_query(n, 1.0, p_n);
  const double g = p.beta - p.alpha;
  return std::pow(dc.L, p.beta / g) * dc.c1 * std::pow(n, -p.alpha / g) + dc.LK * std::sqrt(p_n);
}

}  // namespace ermc
