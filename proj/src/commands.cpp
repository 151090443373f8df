#include "ermc/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "ermc/errors.hpp"
#include "ermc/format.hpp"
#include "ermc/montecarlo.hpp"
#include "ermc/orlicz.hpp"
#include "ermc/problems.hpp"
#include "ermc/transport.hpp"

namespace ermc {

namespace {

using json = nlohmann::ordered_json;

std::string provenance(const RunConfig& cfg) {
  return std::string("ermc ") + ERMC_VERSION + " config_hash=" + config_hash(cfg);
}

std::ofstream open_output(const std::string& dir, const std::string& file) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  const auto path = std::filesystem::path(dir) / file;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void finish_output(std::ofstream& out, const std::string& file) {
  out.flush();
  if (!out) throw IoError("write failed for '" + file + "'");
}

void write_json(const RunConfig& cfg, const std::string& dir, const std::string& file, json body) {
  json doc;
  doc["artifact_version"] = ERMC_VERSION;
  doc["config_hash"] = config_hash(cfg);
  for (auto& [k, v] : body.items()) doc[k] = v;
  auto out = open_output(dir, file);
  out << doc.dump(2) << '\n';
  finish_output(out, file);
}

json params_json(const ConcentrationParams& p) {
  return {{"beta", p.beta},       {"alpha", p.alpha},   {"tau", p.tau},
          {"j0", fmt_double(p.j0)}, {"psi1_a", p.psi1_a}, {"diam_s", p.diam_s},
          {"eta", p.eta.to_string()}, {"kappa", p.kappa.to_string()}, {"iota", p.iota.to_string()}};
}

json verify_json(const VerifyResult& r) {
  return {{"max_violation", r.max_violation}, {"checked", r.checked}, {"tolerance", r.tolerance}, {"pass", r.pass}};
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' '); }

}  // namespace

void apply_overrides(RunConfig& cfg, const CliOverrides& o) {
  if (o.seed) {
    if (cfg.experiment) cfg.experiment->base_seed = *o.seed;
    if (cfg.verify) cfg.verify->seed = *o.seed;
    if (cfg.mcdiarmid) cfg.mcdiarmid->seed = *o.seed;
  }
  if (o.threads && cfg.experiment) cfg.experiment->threads = *o.threads;
  if (o.out && cfg.experiment) cfg.experiment->out = *o.out;
}

std::unique_ptr<EstimationProblem> make_problem(const RunConfig& cfg, const std::string& name) {
  if (name == "euclidean") return std::make_unique<EuclideanBarycenterProblem>(cfg.euclidean.value_or(EuclideanConfig{}));
  if (name == "spider") return std::make_unique<SpiderTreeBarycenterProblem>(cfg.spider.value_or(SpiderConfig{}));
  if (name == "eigenvector") return std::make_unique<EigenvectorProblem>(cfg.eigenvector.value_or(EigenvectorConfig{}));
  if (name == "lasso") return std::make_unique<LassoProblem>(cfg.lasso.value_or(LassoConfig{}));
  if (name == "entropic") return std::make_unique<EntropicBarycenterProblem>(cfg.entropic.value_or(EntropicConfig{}));
  throw ConfigError("unknown problem '" + name + "'");
}

std::vector<double> default_t_grid(std::size_t n) {
  // the mean of uniforms never deviates by more than 1/2 from its center
  const double top = std::min(0.5, 12.0 / std::sqrt(12.0 * static_cast<double>(n)));
  std::vector<double> t;
  for (int k = 1; k <= 10; ++k) t.push_back(top * k / 10.0);
  return t;
}

// ------------------------------------------------------------------- bound

int cmd_bound(const RunConfig& cfg, const std::string& out_dir, std::ostream& out) {
  if (!cfg.bound) throw ConfigError("bound needs a [bound] section");
  const auto& sec = *cfg.bound;
  const ConcentrationParams p = sec.problem.empty() ? sec.params : make_problem(cfg, sec.problem)->params();
  const auto dc = derive_constants(p);  // throws on regime violations
  const bool closed_form = p.beta == 2.0 && p.alpha == 1.0;

  out << "# " << provenance(cfg) << '\n';
  out << "# L=" << fmt_double(dc.L) << " K=" << fmt_double(dc.K) << " c1=" << fmt_double(dc.c1)
      << " c2=" << fmt_double(dc.c2) << " q=" << fmt_double(dc.q) << '\n';
  out << pad("n", 8) << pad("delta", 8) << pad("p_n", 14) << pad("theorem", 24) << pad("corollary", 24) << "expectation\n";

  json rows = json::array();
  std::string violation;
  for (std::size_t n : sec.n_grid) {
    const double nn = static_cast<double>(n);
    const double p_n = p.p_n_raw(nn);
    for (double delta : sec.delta_grid) {
      json row = {{"n", n}, {"delta", delta}, {"p_n", p_n}};
      if (p_n > 0.75) {
        violation = "outside theorem regime: p_n > 3/4 at n = " + std::to_string(n);
        row["regime"] = "p_n > 3/4";
        out << pad(std::to_string(n), 8) << pad(fmt_double(delta), 8) << pad(fmt_double(p_n), 14)
            << "outside theorem regime (p_n > 3/4)\n";
        rows.push_back(row);
        continue;
      }
      const auto tb = theorem_bound(p, dc, BoundQuery{n, delta, p_n});
      const double eb = expectation_bound(p, dc, nn, p_n);
      row["theorem"] = tb.value;
      row["theorem_rhs"] = tb.rhs;
      row["probability"] = tb.probability;
      std::string cor = "-";
      if (closed_form) {
        const double c = corollary_b2a1_probability(dc.L, p.diam_s, nn, delta, p_n);
        row["corollary"] = c;
        cor = fmt_double(c);
      }
      row["expectation"] = eb;
      out << pad(std::to_string(n), 8) << pad(fmt_double(delta), 8) << pad(fmt_double(p_n), 14)
          << pad(fmt_double(tb.value), 24) << pad(cor, 24) << fmt_double(eb) << '\n';
      rows.push_back(row);
    }
  }
  json body;
  body["problem"] = sec.problem.empty() ? "explicit" : sec.problem;
  body["params"] = params_json(p);
  body["derived"] = {{"q", dc.q}, {"Q", dc.Q}, {"s", dc.s}, {"L", dc.L}, {"K", dc.K}, {"c1", dc.c1}, {"c2", dc.c2}};
  body["rows"] = rows;
  write_json(cfg, out_dir, "bound.json", body);
  if (!violation.empty()) throw RegimeError(violation);
  return kExitOk;
}

// -------------------------------------------------------------- experiment

int cmd_experiment(const RunConfig& cfg, const std::string& out_dir, std::ostream& out) {
  if (!cfg.experiment) throw ConfigError("experiment needs an [experiment] section");
  const auto& sec = *cfg.experiment;
  const auto problem = make_problem(cfg, sec.problem);
  const auto params = problem->params();
  const auto records = run_experiment(*problem, sec.n_grid, sec.reps, sec.base_seed, sec.threads);
  const auto report = fit_rate(records, &params, sec.delta, sec.delta_grid);

  const std::string header = "# " + provenance(cfg) + '\n';
  {
    auto f = open_output(out_dir, "records.csv");
    f << header;
    write_records_csv(f, records, sec.timing);
    finish_output(f, "records.csv");
  }
  {
    auto f = open_output(out_dir, "plot.dat");
    f << header;
    write_plot_data(f, report);
    finish_output(f, "plot.dat");
  }
  write_json(cfg, out_dir, "report.json", rate_report_json(report));

  auto flag = [](const std::optional<bool>& b) { return b ? (*b ? "pass" : "FAIL") : "n/a"; };
  out << "# " << provenance(cfg) << '\n';
  out << "problem " << report.problem << ": slope " << fmt_double(report.slope) << ", r2 " << fmt_double(report.r2)
      << '\n';
  for (const auto& pt : report.points) {
    out << "  n=" << pt.n << " median=" << fmt_double(pt.q50) << " q95=" << fmt_double(pt.q95)
        << " bound=" << fmt_double(pt.bound) << (pt.pre_asymptotic ? " (pre-asymptotic)" : "") << '\n';
  }
  out << "rate " << flag(report.rate_pass) << ", tail " << flag(report.tail_pass) << ", expectation "
      << flag(report.expectation_pass) << (report.valid ? "" : ", INVALID (>5% solver failures)") << '\n';
  const bool ok = report.valid && report.rate_pass.value_or(true) && report.tail_pass.value_or(true) &&
                  report.expectation_pass.value_or(true);
  return ok ? kExitOk : kExitAcceptance;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const RunConfig& cfg, const std::string& out_dir, std::ostream& out) {
  const VerifySection sec = cfg.verify.value_or(VerifySection{});
  const auto& tol = cfg.tolerances;
  if (sec.problems.empty()) {
    out << "nothing to verify\n";
    return kExitOk;
  }
  json checks = json::array();
  bool all = true;
  auto report = [&](const std::string& problem, const std::string& check, const VerifyResult& r) {
    out << pad(problem, 13) << pad(check, 34) << "max_violation=" << fmt_double(r.max_violation)
        << " checked=" << r.checked << (r.pass ? " pass" : " FAIL") << '\n';
    json j = verify_json(r);
    j["problem"] = problem;
    j["check"] = check;
    checks.push_back(j);
    all = all && r.pass;
  };

  out << "# " << provenance(cfg) << '\n';
  RngSpec root{sec.seed, 0};
  std::uint64_t stream = 0;
  for (const auto& name : sec.problems) {
    Rng rng(root.child(++stream));
    if (name == "entropic") {
      const EntropicBarycenterProblem prob(cfg.entropic.value_or(EntropicConfig{}));
      report(name, "quadruple (exact LP)", verify_entropic_quadruple(prob.grid(), sec.entropic_quadruples, rng,
                                                                     tol.entropic_quadruple));
      // strong convexity of the empirical objective around its minimizer
      const auto batch = prob.sample(rng, 50);
      std::vector<double> w(batch.n(), 1.0 / static_cast<double>(batch.n()));
      const auto term = make_transport_term(prob.grid(), batch.samples, w, TransportRoute::Auto);
      const auto opts = prob.solver_options();
      const auto sol = entropic_barycenter_solve(*term, prob.config().lambda, prob.grid(), opts);
      const double tau = prob.params().tau;
      report(name, "variance (tau=" + fmt_double(tau) + ")",
             verify_entropic_strong_convexity(*term, prob.config().lambda, prob.grid(), sol.weights, opts.tol,
                                              sec.entropic_densities, tau, rng));
      // lambda KL(phi | phi_hat) >= (lambda / 2) |phi - phi_hat|_1^2 by Pinsker
      const double modulus = prob.config().lambda / 2.0;
      report(name, "variance (modulus lambda/2)",
             verify_entropic_strong_convexity(*term, prob.config().lambda, prob.grid(), sol.weights, opts.tol,
                                              sec.entropic_densities, modulus, rng));
      continue;
    }
    const auto problem = make_problem(cfg, name);
    const auto& model = dynamic_cast<const AssumptionModel&>(*problem);
    report(name, "quadruple", verify_quadruple_inequality(model, sec.quadruples, rng, tol.quadruple));
    const double vtol = name == "euclidean" ? tol.euclidean_variance : tol.variance;
    report(name, "variance", verify_variance_inequality(model, sec.variance_points, rng, vtol));
    if (name == "eigenvector") {
      const auto& eig = dynamic_cast<const EigenvectorProblem&>(*problem);
      report(name, "eigengap", verify_eigengap_lemma(eig.covariance(), sec.eigengap_draws, rng));
    }
  }
  json body;
  body["checks"] = checks;
  body["pass"] = all;
  write_json(cfg, out_dir, "verify.json", body);
  return all ? kExitOk : kExitAcceptance;
}

// ----------------------------------------------------------- mcdiarmid-sim

int cmd_mcdiarmid_sim(const RunConfig& cfg, const std::string& out_dir, std::ostream& out) {
  const McDiarmidSection sec = cfg.mcdiarmid.value_or(McDiarmidSection{});
  const auto t_grid = sec.t_grid.empty() ? default_t_grid(sec.n) : sec.t_grid;
  const unsigned threads = cfg.experiment ? cfg.experiment->threads : 1;
  const RngSpec root{sec.seed, 0};

  const auto plain = mcdiarmid_simulate(uniform_mean_experiment(sec.n), sec.reps, t_grid, root.child(1), threads);
  const auto bad = mcdiarmid_simulate(uniform_mean_bad_set_experiment(sec.n, sec.p_bad), sec.reps, t_grid,
                                      root.child(2), threads);

  out << "# " << provenance(cfg) << '\n';
  json body;
  auto emit = [&](const std::string& label, const TailTable& table) {
    out << label << " (reference " << fmt_double(table.reference) << ", reps " << table.reps << ")\n";
    out << pad("t", 24) << pad("empirical", 12) << pad("bound", 24) << "dkw\n";
    json rows = json::array();
    for (const auto& r : table.rows) {
      out << pad(fmt_double(r.t), 24) << pad(fmt_double(r.empirical), 12) << pad(fmt_double(r.bound), 24)
          << fmt_double(r.margin) << (r.pass ? "" : "  FAIL") << '\n';
      rows.push_back({{"t", r.t}, {"empirical", r.empirical}, {"bound", r.bound}, {"dkw_margin", r.margin},
                      {"pass", r.pass}});
    }
    body[label] = {{"reference", table.reference}, {"reps", table.reps}, {"rows", rows}, {"pass", table.all_pass}};
  };
  emit("bernstein_mcdiarmid", plain);
  emit("extended_mcdiarmid", bad);
  body["n"] = sec.n;
  body["p_bad"] = sec.p_bad;
  write_json(cfg, out_dir, "mcdiarmid.json", body);
  return plain.all_pass && bad.all_pass ? kExitOk : kExitAcceptance;
}

// -------------------------------------------------------------- dispatcher

int run_command(const std::string& command, const std::string& config_path, const CliOverrides& overrides,
                std::ostream& out, std::ostream& err) {
  try {
    RunConfig cfg = load_config(config_path);
    apply_overrides(cfg, overrides);
    const std::string out_dir = overrides.out ? *overrides.out : cfg.experiment ? cfg.experiment->out : "out";
    if (command == "bound") return cmd_bound(cfg, out_dir, out);
    if (command == "experiment") return cmd_experiment(cfg, out_dir, out);
    if (command == "verify") return cmd_verify(cfg, out_dir, out);
    if (command == "mcdiarmid-sim") return cmd_mcdiarmid_sim(cfg, out_dir, out);
    err << "unknown command '" << command << "'\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const RegimeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitAcceptance;
  }
}

}  // namespace ermc
