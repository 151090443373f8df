#include "ermc/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <stdexcept>

#include "ermc/format.hpp"
#include "ermc/orlicz.hpp"
#include "ermc/parallel.hpp"

namespace ermc {

RngSpec replication_stream(std::uint64_t base_seed, std::size_t n, std::size_t rep) {
  return RngSpec{base_seed, (static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint64_t>(rep)};
}

std::vector<ReplicationRecord> run_experiment(const EstimationProblem& problem, const std::vector<std::size_t>& n_grid,
                                              std::size_t reps, std::uint64_t base_seed, unsigned threads) {
  if (reps < 100) throw std::invalid_argument("reps below minimum 100");
  if (n_grid.size() < 4) throw std::invalid_argument("n grid needs at least 4 points");
  for (std::size_t k = 1; k < n_grid.size(); ++k) {
    if (!(n_grid[k] > n_grid[k - 1]) || n_grid[0] < 1) throw std::invalid_argument("n grid must be increasing");
    const double r0 = static_cast<double>(n_grid[1]) / static_cast<double>(n_grid[0]);
    const double rk = static_cast<double>(n_grid[k]) / static_cast<double>(n_grid[k - 1]);
    if (std::abs(rk - r0) > 1e-6 * r0) throw std::invalid_argument("n grid must be geometric");
  }
  std::vector<ReplicationRecord> records;
  for (std::size_t n : n_grid) {
    auto at_n = run_replications(problem, n, reps, base_seed, threads);
    records.insert(records.end(), std::make_move_iterator(at_n.begin()), std::make_move_iterator(at_n.end()));
  }
  return records;
}

std::vector<ReplicationRecord> run_replications(const EstimationProblem& problem, std::size_t n, std::size_t reps,
                                                std::uint64_t base_seed, unsigned threads) {
  if (n < 1) throw std::invalid_argument("sample size must be >= 1");
  const auto truth = problem.true_minimizers();
  const auto metric = problem.metric();
  std::vector<ReplicationRecord> records(reps);
  parallel_for(records.size(), threads, [&](std::size_t rep) {
    auto& rec = records[rep];
    rec.problem = problem.name();
    rec.n = n;
    rec.rep = rep;
    const RngSpec spec = replication_stream(base_seed, n, rep);
    rec.seed = derive_seed(spec);
    const auto start = std::chrono::steady_clock::now();
    try {
      Rng rng(spec);
      const auto batch = problem.sample(rng, n);
      rec.distance = set_distance(problem.solve_empirical(batch), truth, metric);
      rec.status = "ok";
    } catch (const std::exception&) {
      rec.distance = std::numeric_limits<double>::quiet_NaN();
      rec.status = "failed";
    }
    rec.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  });
  return records;
}

bool experiment_valid(const std::vector<ReplicationRecord>& records) {
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> counts;  // n -> (failed, total)
  for (const auto& r : records) {
    auto& c = counts[r.n];
    c.first += !r.ok();
    ++c.second;
  }
  for (const auto& [n, c] : counts)
    if (static_cast<double>(c.first) > 0.05 * static_cast<double>(c.second)) return false;
  return true;
}

double empirical_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  level = std::clamp(level, 0.0, 1.0);
  std::sort(values.begin(), values.end());
  const double pos = std::ceil(level * static_cast<double>(values.size()));
  const auto idx = static_cast<std::size_t>(std::max(pos, 1.0)) - 1;
  return values[std::min(idx, values.size() - 1)];
}

double distance_bound(const ConcentrationParams& params, std::size_t n, double delta, bool* pre_asymptotic) {
  const double nn = static_cast<double>(n);
  const double raw = params.p_n_raw(nn);
  const bool pre = raw > 0.75;
  if (pre_asymptotic) *pre_asymptotic = pre;
  const double p_n = pre ? 0.0 : raw;
  const auto dc = derive_constants(params);
  if (params.beta == 2.0 && params.alpha == 1.0) return corollary_b2a1_probability(dc.L, params.diam_s, nn, delta, p_n);
  return theorem_bound(params, dc, BoundQuery{n, delta, p_n}).value;
}

TailComparison tail_compare(const std::vector<double>& distances, std::size_t n, const ConcentrationParams& params,
                            const std::vector<double>& delta_grid) {
  if (distances.size() < 1000) throw std::invalid_argument("tail comparison needs reps >= 1000");
  TailComparison tc;
  tc.n = n;
  tc.reps = distances.size();
  const double margin = dkw_margin(distances.size());
  const double reps = static_cast<double>(distances.size());
  for (double delta : delta_grid) {
    TailCompareRow row;
    row.delta = delta;
    row.p_n = params.p_n_raw(static_cast<double>(n));
    row.bound = distance_bound(params, n, delta, &row.pre_asymptotic);
    const double p_used = row.pre_asymptotic ? 0.0 : row.p_n;
    row.level = 1.0 - p_used - delta;
    row.empirical_quantile = empirical_quantile(distances, row.level);
    std::size_t exceed = 0;
    for (double d : distances) exceed += d > row.bound;
    row.exceed_fraction = static_cast<double>(exceed) / reps;
    row.margin = margin;
    // P(dist > bound) <= p_n + delta, with the DKW allowance for finite reps
    row.pass = row.exceed_fraction <= p_used + delta + margin;
    tc.pre_asymptotic = tc.pre_asymptotic || row.pre_asymptotic;
    tc.pass = tc.pass && row.pass;
    tc.rows.push_back(row);
  }
  return tc;
}

RateReport fit_rate(const std::vector<ReplicationRecord>& records, const ConcentrationParams* params, double delta,
                    const std::vector<double>& delta_grid) {
  std::map<std::size_t, std::vector<double>> by_n;
  std::map<std::size_t, std::size_t> failed;
  RateReport report;
  for (const auto& r : records) {
    if (report.problem.empty()) report.problem = r.problem;
    by_n[r.n];
    if (r.ok()) by_n[r.n].push_back(r.distance);
    else ++failed[r.n];
  }
  if (by_n.size() < 4) throw std::invalid_argument("rate fit needs at least 4 distinct n");
  report.delta = delta;
  report.valid = experiment_valid(records);

  std::vector<double> lx, ly;
  bool expectation_ok = true, expectation_checked = false;
  bool tail_ok = true, tail_checked = false;
  for (auto& [n, d] : by_n) {
    RatePoint pt;
    pt.n = n;
    pt.ok = d.size();
    pt.failed = failed[n];
    if (d.empty()) throw std::invalid_argument("no successful replications at n = " + std::to_string(n));
    pt.q50 = empirical_quantile(d, 0.5);
    pt.q90 = empirical_quantile(d, 0.9);
    pt.q95 = empirical_quantile(d, 0.95);
    double s = 0.0, s2 = 0.0;
    for (double v : d) {
      s += v;
      s2 += v * v;
    }
    pt.mean = s / static_cast<double>(d.size());
    pt.mean_sq = s2 / static_cast<double>(d.size());
    if (!(pt.q50 > 0.0)) throw std::invalid_argument("zero median distance at n = " + std::to_string(n));
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(pt.q50));

    if (params) {
      pt.bound = distance_bound(*params, n, delta, &pt.pre_asymptotic);
      if (!pt.pre_asymptotic) {
        const auto dc = derive_constants(*params);
        pt.expectation_bound = expectation_bound(*params, dc, static_cast<double>(n), params->p_n_raw(static_cast<double>(n)));
        // mean of dist^beta against the bound on E[dist^beta]
        double mb = 0.0;
        for (double v : d) mb += std::pow(v, params->beta);
        mb /= static_cast<double>(d.size());
        expectation_ok = expectation_ok && mb <= pt.expectation_bound;
        expectation_checked = true;
      }
      if (d.size() >= 1000) {
        std::vector<double> grid = delta_grid;
        if (std::find(grid.begin(), grid.end(), delta) == grid.end()) grid.push_back(delta);
        auto tc = tail_compare(d, n, *params, grid);
        tail_ok = tail_ok && tc.pass;
        tail_checked = true;
        report.tails.push_back(std::move(tc));
      }
    }
    report.points.push_back(pt);
  }

  // least squares on (log n, log median)
  const double m = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / m;
    my += ly[i] / m;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  report.slope = sxy / sxx;
  report.intercept = my - report.slope * mx;
  report.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  report.rate_pass = report.slope >= -0.6 && report.slope <= -0.4;
  if (tail_checked) report.tail_pass = tail_ok;
  if (expectation_checked) report.expectation_pass = expectation_ok;
  return report;
}

void write_records_csv(std::ostream& out, const std::vector<ReplicationRecord>& records, bool timing) {
  out << "problem,n,rep,seed,distance,status,millis\n";
  for (const auto& r : records) {
    out << r.problem << ',' << r.n << ',' << r.rep << ',' << r.seed << ',' << fmt_double(r.distance) << ','
        << r.status << ',' << (timing ? fmt_double(r.millis) : std::string("0")) << '\n';
  }
}

namespace {

nlohmann::ordered_json opt(const std::optional<bool>& b) {
  return b ? nlohmann::ordered_json(*b) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json rate_report_json(const RateReport& report) {
  nlohmann::ordered_json j;
  j["problem"] = report.problem;
  std::vector<std::size_t> ns;
  std::vector<double> q50, q90, q95, mean, bound;
  std::vector<bool> pre;
  for (const auto& p : report.points) {
    ns.push_back(p.n);
    q50.push_back(p.q50);
    q90.push_back(p.q90);
    q95.push_back(p.q95);
    mean.push_back(p.mean);
    bound.push_back(p.bound);
    pre.push_back(p.pre_asymptotic);
  }
  j["n_grid"] = ns;
  j["quantiles"] = {{"0.5", q50}, {"0.9", q90}, {"0.95", q95}, {"mean", mean}};
  j["slope"] = report.slope;
  j["intercept"] = report.intercept;
  j["r2"] = report.r2;
  j["delta"] = report.delta;
  j["bound_curve"] = bound;
  j["pre_asymptotic"] = pre;
  j["valid"] = report.valid;
  auto tails = nlohmann::ordered_json::array();
  for (const auto& tc : report.tails) {
    for (const auto& row : tc.rows) {
      tails.push_back({{"n", tc.n},
                       {"delta", row.delta},
                       {"p_n", row.p_n},
                       {"level", row.level},
                       {"bound", row.bound},
                       {"empirical_quantile", row.empirical_quantile},
                       {"exceed_fraction", row.exceed_fraction},
                       {"dkw_margin", row.margin},
                       {"pre_asymptotic", row.pre_asymptotic},
                       {"pass", row.pass}});
    }
  }
  j["tail_comparison"] = tails;
  j["flags"] = {{"rate_pass", opt(report.rate_pass)},
                {"tail_pass", opt(report.tail_pass)},
                {"expectation_pass", opt(report.expectation_pass)}};
  return j;
}

void write_plot_data(std::ostream& out, const RateReport& report) {
  out << "n q50 q90 q95 mean bound pre_asymptotic\n";
  for (const auto& p : report.points) {
    out << p.n << ' ' << fmt_double(p.q50) << ' ' << fmt_double(p.q90) << ' ' << fmt_double(p.q95) << ' '
        << fmt_double(p.mean) << ' ' << fmt_double(p.bound) << ' ' << (p.pre_asymptotic ? 1 : 0) << '\n';
  }
}

}  // namespace ermc
