#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ermc/random.hpp"

namespace ermc {

enum class OrliczMethod { EmpiricalBisection, ClosedForm };

std::string to_string(OrliczMethod m);

struct OrliczEstimate {
  double q = 1.0;
  double value = 0.0;
  std::size_t n_samples = 0;
  OrliczMethod method = OrliczMethod::ClosedForm;
};

struct SubGammaParams {
  double variance_factor = 0.0;  // sigma^2
  double scale = 0.0;            // M
};

// Smallest c with mean(exp(|x/c|^q)) <= 2, by bisection.
OrliczEstimate psi_norm_empirical(std::span<const double> samples, double q);

// Same defining equation with an exact expectation: expect_exp(c) must return
// E exp(|X/c|^q), decreasing in c. `scale` is a rough magnitude of X.
OrliczEstimate psi_norm_from_expectation(const std::function<double(double)>& expect_exp, double q, double scale);

OrliczEstimate psi_norm_constant(double c, double q);
OrliczEstimate psi2_gaussian(double sd);          // sd * sqrt(8/3)
OrliczEstimate psi1_exponential(double rate);     // 2 / rate
OrliczEstimate psi1_uniform_abs(double width);    // |X|, X ~ Uniform[0, width]

double sub_gamma_tail(const SubGammaParams& p, double t);
double sub_gamma_quantile(const SubGammaParams& p, double delta);

double matrix_bernstein_tail(std::size_t d, double n, double psi2, double t);

// Deviation with probability >= 1 - p - delta; requires p <= 3/4.
double mcdiarmid_extended_bound(std::size_t n, double psi1_b, double p, double delta);
// The same statement read as a bound on P(f - m > t).
double mcdiarmid_extended_tail(std::size_t n, double psi1_b, double p, double t);

// Sub-gamma McDiarmid: deviation e(2 sigma sqrt(log 1/delta) + M log 1/delta).
double bernstein_mcdiarmid_bound(double sigma, double M, double delta);
double bernstein_mcdiarmid_tail(double sigma, double M, double t);

double dkw_margin(std::size_t reps, double confidence = 0.99);

struct McDiarmidExperiment {
  std::size_t n = 0;
  std::function<double(Rng&)> sampler;                      // one coordinate
  std::function<double(const std::vector<double>&)> f;
  std::function<bool(const std::vector<double>&)> good_set;  // empty: whole space
  std::function<double(double)> bound_tail;                  // bound on P(f - m > t)
};

struct TailRow {
  double t = 0, empirical = 0, bound = 0, margin = 0;
  bool pass = false;
};

struct TailTable {
  std::vector<TailRow> rows;
  double reference = 0;
  std::size_t reps = 0;
  bool all_pass = true;
};

TailTable mcdiarmid_simulate(const McDiarmidExperiment& ex, std::size_t reps, const std::vector<double>& t_grid,
                             const RngSpec& spec, unsigned threads = 1);

// f = mean of n Uniform[0,1] coordinates, with the sub-gamma McDiarmid bound.
McDiarmidExperiment uniform_mean_experiment(std::size_t n);
// Same f, good set {all coordinates <= thr} with thr chosen so P(bad) = p_bad,
// b(x, y) = min(|x - y|, thr) / n.
McDiarmidExperiment uniform_mean_bad_set_experiment(std::size_t n, double p_bad);

}  // namespace ermc
