#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <string>

namespace ermc {

// eta, kappa, iota as functions of the sample size. Either a closed form
// coef * exp(-rate * n) (zero when coef == 0) or a table keyed by n.
class RateFunction {
 public:
  enum class Kind { Exponential, Table };

  RateFunction() = default;
  static RateFunction zero() { return exponential(0.0, 0.0); }
  static RateFunction exponential(double coef, double rate);
  static RateFunction table(std::map<std::size_t, double> values);

  double operator()(double n) const;

  Kind kind() const { return kind_; }
  double coef() const { return coef_; }
  double rate() const { return rate_; }
  const std::map<std::size_t, double>& values() const { return table_; }

  // "0", "exp:<coef>:<rate>", or "table:<n>=<v>;<n>=<v>"
  std::string to_string() const;
  static RateFunction parse(const std::string& text);

  bool operator==(const RateFunction&) const = default;

 private:
  Kind kind_ = Kind::Exponential;
  double coef_ = 0.0;
  double rate_ = 0.0;
  std::map<std::size_t, double> table_;
};

struct ConcentrationParams {
  double beta = 2.0;
  double alpha = 1.0;
  double tau = 1.0;
  double j0 = std::numeric_limits<double>::infinity();
  double psi1_a = 0.0;
  double diam_s = 0.0;
  RateFunction eta;
  RateFunction kappa;
  RateFunction iota;

  double p_n_raw(double n) const { return eta(n) + kappa(n) + iota(n); }
  double p_n(double n) const;  // clamped to [0, 1]

  bool operator==(const ConcentrationParams&) const = default;
};

struct DerivedConstants {
  double q = 0, Q = 0, s = 0;
  double L = 0, K = 0;
  double c1 = 0, c2 = 0;
  // L^{beta/(beta-alpha)} * K, finite even when L == 0.
  double LK = 0;
};

struct BoundQuery {
  std::size_t n = 1;
  double delta = 0.05;
  double p_n = 0.0;
};

struct BoundResult {
  double value = 0;        // bound on the distance itself
  double rhs = 0;          // bound on distance^q
  double main_term = 0;    // rhs without the p_n contribution
  double p_term = 0;       // C * p_n^{q/(2 beta)}
  double C = 0;
  double probability = 1;  // 1 - p_n - delta
};

DerivedConstants derive_constants(const ConcentrationParams& p);

double theorem_constant_c(const ConcentrationParams& p, const DerivedConstants& dc, double n);

BoundResult theorem_bound(const ConcentrationParams& p, const DerivedConstants& dc, const BoundQuery& query);

// The beta = 2, alpha = 1 closed form with rounded constants.
double corollary_b2a1_probability(double L, double diam_s, double n, double delta, double p_n);

// Bound on E[dist^beta | good event].
double expectation_bound(const ConcentrationParams& p, const DerivedConstants& dc, double n, double p_n);

}  // namespace ermc
