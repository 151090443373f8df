#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ermc/bounds.hpp"
#include "ermc/core.hpp"

namespace ermc {

struct ReplicationRecord {
  std::string problem;
  std::size_t n = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double distance = 0.0;  // NaN when the solver failed
  std::string status = "ok";
  double millis = 0.0;

  bool ok() const { return status == "ok"; }
};

// Stream of replication `rep` at sample size n.
RngSpec replication_stream(std::uint64_t base_seed, std::size_t n, std::size_t rep);

std::vector<ReplicationRecord> run_experiment(const EstimationProblem& problem, const std::vector<std::size_t>& n_grid,
                                              std::size_t reps, std::uint64_t base_seed, unsigned threads = 1);

// All replications at one sample size; same streams as run_experiment.
std::vector<ReplicationRecord> run_replications(const EstimationProblem& problem, std::size_t n, std::size_t reps,
                                                std::uint64_t base_seed, unsigned threads = 1);

// More than 5% failures at any n invalidates the experiment.
bool experiment_valid(const std::vector<ReplicationRecord>& records);

// Inverted empirical CDF: smallest sample x with F_n(x) >= level.
double empirical_quantile(std::vector<double> values, double level);

struct TailCompareRow {
  double delta = 0;
  double p_n = 0;             // raw eta + kappa + iota
  double level = 0;           // 1 - p_n - delta (1 - delta when pre-asymptotic)
  double bound = 0;
  double empirical_quantile = 0;
  double exceed_fraction = 0;  // fraction of distances above the bound
  double margin = 0;
  bool pre_asymptotic = false;
  bool pass = false;
};

struct TailComparison {
  std::size_t n = 0;
  std::size_t reps = 0;
  std::vector<TailCompareRow> rows;
  bool pre_asymptotic = false;
  bool pass = true;
};

// Bound on the distance used for tail checks: the beta = 2, alpha = 1 closed
// form when it applies, else the general theorem. When p_n > 3/4 the theory
// says nothing; the leading term alone is used instead, which is stricter.
double distance_bound(const ConcentrationParams& params, std::size_t n, double delta, bool* pre_asymptotic = nullptr);

TailComparison tail_compare(const std::vector<double>& distances, std::size_t n, const ConcentrationParams& params,
                            const std::vector<double>& delta_grid);

struct RatePoint {
  std::size_t n = 0;
  std::size_t ok = 0, failed = 0;
  double q50 = 0, q90 = 0, q95 = 0, mean = 0, mean_sq = 0;
  double bound = 0;  // at the report's delta
  double expectation_bound = 0;
  bool pre_asymptotic = false;
};

struct RateReport {
  std::string problem;
  double delta = 0.05;
  std::vector<RatePoint> points;
  double slope = 0, intercept = 0, r2 = 0;
  bool valid = true;
  std::optional<bool> rate_pass, tail_pass, expectation_pass;
  std::vector<TailComparison> tails;
};

RateReport fit_rate(const std::vector<ReplicationRecord>& records, const ConcentrationParams* params = nullptr,
                    double delta = 0.05, const std::vector<double>& delta_grid = {});

void write_records_csv(std::ostream& out, const std::vector<ReplicationRecord>& records, bool timing);
nlohmann::ordered_json rate_report_json(const RateReport& report);
void write_plot_data(std::ostream& out, const RateReport& report);

}  // namespace ermc
