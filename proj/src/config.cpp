#include "ermc/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <type_traits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ermc/errors.hpp"
#include "ermc/format.hpp"

namespace ermc {

namespace {

using boost::property_tree::ptree;

bool same(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.size() == b.size() && a == b; }

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Reads keys from one section and remembers which ones were used, so the
// leftovers can be reported as unknown.
class Reader {
 public:
  Reader(std::string name, const ptree& tree) : name_(std::move(name)), tree_(tree) {
    for (const auto& [k, v] : tree_) {
      if (!v.empty()) throw ConfigError("[" + name_ + "] nested key '" + k + "'");
    }
  }

  bool has(const std::string& key) const { return tree_.find(key) != tree_.not_found(); }

  std::string text(const std::string& key) {
    used_.insert(key);
    return trim(tree_.get<std::string>(key));
  }

  template <class Fn>
  void read(const std::string& key, Fn&& fn) {
    if (!has(key)) return;
    const std::string raw = text(key);
    try {
      fn(raw);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("[" + name_ + "] " + key + " = '" + raw + "': " + e.what());
    }
  }

  void get(const std::string& key, double& out) {
    read(key, [&](const std::string& s) { out = parse_double(s); });
  }
  void get(const std::string& key, std::uint64_t& out) {
    read(key, [&](const std::string& s) { out = parse_u64(s); });
  }
  static_assert(std::is_same_v<std::size_t, std::uint64_t>);
  void get(const std::string& key, unsigned& out) {
    read(key, [&](const std::string& s) {
      const auto v = parse_u64(s);
      if (v > 1024) throw std::invalid_argument("too large");
      out = static_cast<unsigned>(v);
    });
  }
  void get(const std::string& key, bool& out) {
    read(key, [&](const std::string& s) {
      if (s == "true") out = true;
      else if (s == "false") out = false;
      else throw std::invalid_argument("expected true or false");
    });
  }
  void get(const std::string& key, std::string& out) {
    read(key, [&](const std::string& s) { out = s; });
  }
  void get(const std::string& key, std::vector<double>& out) {
    read(key, [&](const std::string& s) {
      out.clear();
      if (s.empty()) return;
      for (const auto& part : split(s, ',')) out.push_back(parse_double(part));
    });
  }
  void get(const std::string& key, std::vector<std::size_t>& out) {
    read(key, [&](const std::string& s) {
      out.clear();
      if (s.empty()) return;
      for (const auto& part : split(s, ',')) out.push_back(parse_u64(trim(part)));
    });
  }
  void get(const std::string& key, std::vector<std::string>& out) {
    read(key, [&](const std::string& s) {
      out.clear();
      if (s.empty()) return;
      for (const auto& part : split(s, ',')) out.push_back(trim(part));
    });
  }
  void get(const std::string& key, Eigen::VectorXd& out) {
    std::vector<double> v;
    read(key, [&](const std::string& s) {
      for (const auto& part : split(s, ',')) v.push_back(parse_double(part));
      out = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    });
  }
  void get(const std::string& key, RateFunction& out) {
    read(key, [&](const std::string& s) { out = RateFunction::parse(s); });
  }

  void require(bool ok, const std::string& what) const {
    if (!ok) throw ConfigError("[" + name_ + "] " + what);
  }

  void finish() const {
    for (const auto& [k, v] : tree_) {
      if (!used_.count(k)) throw ConfigError("[" + name_ + "] unknown key '" + k + "'");
    }
  }

 private:
  static std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto t = trim(s);
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      throw std::invalid_argument("not an unsigned integer");
    return v;
  }

  std::string name_;
  const ptree& tree_;
  std::set<std::string> used_;
};

const std::set<std::string> kProblems = {"euclidean", "spider", "eigenvector", "lasso", "entropic"};

ExperimentSection read_experiment(Reader& r) {
  ExperimentSection s;
  r.get("problem", s.problem);
  r.get("n_grid", s.n_grid);
  r.get("reps", s.reps);
  r.get("base_seed", s.base_seed);
  r.get("delta", s.delta);
  r.get("delta_grid", s.delta_grid);
  r.get("threads", s.threads);
  r.get("timing", s.timing);
  r.get("out", s.out);
  r.require(kProblems.count(s.problem) > 0, "unknown problem '" + s.problem + "'");
  r.require(s.reps >= 100, "reps below minimum 100");
  r.require(s.n_grid.size() >= 4, "n_grid needs at least 4 values");
  r.require(s.delta > 0.0 && s.delta <= 1.0, "delta must lie in (0, 1]");
  for (double d : s.delta_grid) r.require(d > 0.0 && d <= 1.0, "delta_grid values must lie in (0, 1]");
  r.require(s.threads >= 1, "threads must be >= 1");
  return s;
}

EuclideanConfig read_euclidean(Reader& r) {
  EuclideanConfig c;
  r.read("family", [&](const std::string& s) { c.family = parse_euclidean_family(s); });
  r.get("mean", c.mean);
  r.get("scale", c.scale);
  r.get("a_scale", c.a_scale);
  r.get("calibration_draws", c.calibration_draws);
  r.get("calibration_seed", c.calibration_seed);
  r.require(c.mean.size() == c.scale.size() && c.mean.size() > 0, "mean and scale must have the same positive length");
  r.require((c.scale.array() > 0.0).all(), "scale entries must be > 0");
  r.require(c.a_scale > 0.0, "a_scale must be > 0");
  r.require(c.calibration_draws >= 1000, "calibration_draws must be >= 1000");
  return c;
}

SpiderConfig read_spider(Reader& r) {
  SpiderConfig c;
  r.get("leg_probs", c.leg_probs);
  r.get("leg_lengths", c.leg_lengths);
  r.get("a_scale", c.a_scale);
  r.get("calibration_draws", c.calibration_draws);
  r.get("calibration_seed", c.calibration_seed);
  r.require(c.leg_probs.size() >= 2 && c.leg_probs.size() == c.leg_lengths.size(),
            "leg_probs and leg_lengths need the same length >= 2");
  double total = 0.0;
  for (double p : c.leg_probs) {
    r.require(p >= 0.0, "leg_probs must be >= 0");
    total += p;
  }
  r.require(std::abs(total - 1.0) < 1e-12, "leg_probs must sum to 1");
  for (double l : c.leg_lengths) r.require(l > 0.0, "leg_lengths must be > 0");
  r.require(c.a_scale > 0.0, "a_scale must be > 0");
  r.require(c.calibration_draws >= 1000, "calibration_draws must be >= 1000");
  return c;
}

EigenvectorConfig read_eigenvector(Reader& r) {
  EigenvectorConfig c;
  r.get("spectrum", c.spectrum);
  r.get("rotate", c.rotate);
  r.get("rotation_seed", c.rotation_seed);
  r.get("a_scale", c.a_scale);
  r.require(c.spectrum.size() >= 2, "spectrum needs at least 2 eigenvalues");
  for (Eigen::Index i = 0; i < c.spectrum.size(); ++i) {
    r.require(c.spectrum(i) > 0.0, "spectrum entries must be > 0");
    if (i > 0) r.require(c.spectrum(i) <= c.spectrum(i - 1), "spectrum must be non-increasing");
  }
  r.require(c.spectrum(0) > c.spectrum(1), "spectrum needs a positive gap");
  r.require(c.a_scale > 0.0, "a_scale must be > 0");
  return c;
}

LassoConfig read_lasso(Reader& r) {
  LassoConfig c;
  r.get("phi0", c.phi0);
  r.get("feature_correlation", c.feature_correlation);
  r.get("noise_sd", c.noise_sd);
  r.get("lambda", c.lambda);
  r.get("solver_tol", c.solver_tol);
  r.get("estimate_seed", c.estimate_seed);
  r.require(c.phi0.size() >= 1, "phi0 must be non-empty");
  // equicorrelation matrix is positive definite iff -1/(m-1) < rho < 1
  if (c.phi0.size() > 1)
    r.require(c.feature_correlation > -1.0 / static_cast<double>(c.phi0.size() - 1), "feature_correlation too negative");
  r.require(c.feature_correlation < 1.0, "feature_correlation must be < 1");
  r.require(c.noise_sd >= 0.0, "noise_sd must be >= 0");
  r.require(c.lambda > 0.0, "lambda must be > 0");
  r.require(c.solver_tol > 0.0, "solver_tol must be > 0");
  return c;
}

EntropicConfig read_entropic(Reader& r) {
  EntropicConfig c;
  r.get("nodes", c.nodes);
  r.get("lambda", c.lambda);
  r.get("pool_size", c.pool_size);
  r.get("bumps", c.bumps);
  r.get("width_min", c.width_min);
  r.get("width_max", c.width_max);
  r.get("dirichlet_alpha", c.dirichlet_alpha);
  r.get("pool_seed", c.pool_seed);
  r.get("solver_tol", c.solver_tol);
  r.get("step0", c.step0);
  r.require(c.nodes >= 2, "nodes must be >= 2");
  r.require(c.lambda > 0.0, "lambda must be > 0");
  r.require(c.pool_size >= 1 && c.bumps >= 1, "pool_size and bumps must be >= 1");
  r.require(c.width_min > 0.0 && c.width_max >= c.width_min, "need 0 < width_min <= width_max");
  r.require(c.dirichlet_alpha > 0.0, "dirichlet_alpha must be > 0");
  r.require(c.solver_tol > 0.0 && c.step0 > 0.0, "solver_tol and step0 must be > 0");
  return c;
}

BoundSection read_bound(Reader& r) {
  BoundSection s;
  auto& p = s.params;
  r.get("problem", s.problem);
  r.get("beta", p.beta);
  r.get("alpha", p.alpha);
  r.get("tau", p.tau);
  r.get("j0", p.j0);
  r.get("psi1_a", p.psi1_a);
  r.get("diam_s", p.diam_s);
  r.get("eta", p.eta);
  r.get("kappa", p.kappa);
  r.get("iota", p.iota);
  r.get("n_grid", s.n_grid);
  r.get("delta_grid", s.delta_grid);
  r.require(s.problem.empty() || kProblems.count(s.problem) > 0, "unknown problem '" + s.problem + "'");
  r.require(!s.n_grid.empty() && !s.delta_grid.empty(), "n_grid and delta_grid must be non-empty");
  return s;
}

VerifySection read_verify(Reader& r) {
  VerifySection s;
  r.get("problems", s.problems);
  r.get("quadruples", s.quadruples);
  r.get("variance_points", s.variance_points);
  r.get("eigengap_draws", s.eigengap_draws);
  r.get("entropic_quadruples", s.entropic_quadruples);
  r.get("entropic_densities", s.entropic_densities);
  r.get("seed", s.seed);
  for (const auto& p : s.problems) r.require(kProblems.count(p) > 0, "unknown problem '" + p + "'");
  return s;
}

McDiarmidSection read_mcdiarmid(Reader& r) {
  McDiarmidSection s;
  r.get("n", s.n);
  r.get("reps", s.reps);
  r.get("p_bad", s.p_bad);
  r.get("t_grid", s.t_grid);
  r.get("seed", s.seed);
  r.require(s.n >= 1, "n must be >= 1");
  r.require(s.reps >= 1000, "reps below minimum 1000");
  r.require(s.p_bad > 0.0 && s.p_bad <= 0.75, "p_bad must lie in (0, 3/4]");
  for (double t : s.t_grid) r.require(t > 0.0, "t_grid values must be > 0");
  return s;
}

Tolerances read_tolerances(Reader& r) {
  Tolerances t;
  r.get("quadruple", t.quadruple);
  r.get("variance", t.variance);
  r.get("euclidean_variance", t.euclidean_variance);
  r.get("entropic_quadruple", t.entropic_quadruple);
  r.require(t.quadruple >= 0 && t.variance >= 0 && t.euclidean_variance >= 0 && t.entropic_quadruple >= 0,
            "tolerances must be >= 0");
  return t;
}

// ------------------------------------------------------------- serializing

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_double(v[i]);
  return s;
}
std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}
std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}
std::string join(const Eigen::VectorXd& v) { return join(std::vector<double>(v.data(), v.data() + v.size())); }

class Writer {
 public:
  void section(const std::string& name) { out_ << (first_ ? "" : "\n") << '[' << name << "]\n", first_ = false; }
  void kv(const std::string& k, const std::string& v) { out_ << k << " = " << v << '\n'; }
  void kv(const std::string& k, double v) { kv(k, fmt_double(v)); }
  void kv(const std::string& k, std::uint64_t v) { kv(k, std::to_string(v)); }
  void kv(const std::string& k, unsigned v) { kv(k, std::to_string(v)); }
  void kv(const std::string& k, bool v) { kv(k, std::string(v ? "true" : "false")); }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool first_ = true;
};

std::string serialize(const RunConfig& c, bool for_hash) {
  Writer w;
  if (c.experiment) {
    const auto& s = *c.experiment;
    w.section("experiment");
    w.kv("problem", s.problem);
    w.kv("n_grid", join(s.n_grid));
    w.kv("reps", std::uint64_t{s.reps});
    w.kv("base_seed", s.base_seed);
    w.kv("delta", s.delta);
    w.kv("delta_grid", join(s.delta_grid));
    if (!for_hash) w.kv("threads", s.threads);
    w.kv("timing", s.timing);
    if (!for_hash) w.kv("out", s.out);
  }
  if (c.euclidean) {
    const auto& s = *c.euclidean;
    w.section("euclidean");
    w.kv("family", to_string(s.family));
    w.kv("mean", join(s.mean));
    w.kv("scale", join(s.scale));
    w.kv("a_scale", s.a_scale);
    w.kv("calibration_draws", std::uint64_t{s.calibration_draws});
    w.kv("calibration_seed", s.calibration_seed);
  }
  if (c.spider) {
    const auto& s = *c.spider;
    w.section("spider");
    w.kv("leg_probs", join(s.leg_probs));
    w.kv("leg_lengths", join(s.leg_lengths));
    w.kv("a_scale", s.a_scale);
    w.kv("calibration_draws", std::uint64_t{s.calibration_draws});
    w.kv("calibration_seed", s.calibration_seed);
  }
  if (c.eigenvector) {
    const auto& s = *c.eigenvector;
    w.section("eigenvector");
    w.kv("spectrum", join(s.spectrum));
    w.kv("rotate", s.rotate);
    w.kv("rotation_seed", s.rotation_seed);
    w.kv("a_scale", s.a_scale);
  }
  if (c.lasso) {
    const auto& s = *c.lasso;
    w.section("lasso");
    w.kv("phi0", join(s.phi0));
    w.kv("feature_correlation", s.feature_correlation);
    w.kv("noise_sd", s.noise_sd);
    w.kv("lambda", s.lambda);
    w.kv("solver_tol", s.solver_tol);
    w.kv("estimate_seed", s.estimate_seed);
  }
  if (c.entropic) {
    const auto& s = *c.entropic;
    w.section("entropic");
    w.kv("nodes", std::uint64_t{s.nodes});
    w.kv("lambda", s.lambda);
    w.kv("pool_size", std::uint64_t{s.pool_size});
    w.kv("bumps", std::uint64_t{s.bumps});
    w.kv("width_min", s.width_min);
    w.kv("width_max", s.width_max);
    w.kv("dirichlet_alpha", s.dirichlet_alpha);
    w.kv("pool_seed", s.pool_seed);
    w.kv("solver_tol", s.solver_tol);
    w.kv("step0", s.step0);
  }
  if (c.bound) {
    const auto& s = *c.bound;
    const auto& p = s.params;
    w.section("bound");
    if (!s.problem.empty()) w.kv("problem", s.problem);
    w.kv("beta", p.beta);
    w.kv("alpha", p.alpha);
    w.kv("tau", p.tau);
    w.kv("j0", p.j0);
    w.kv("psi1_a", p.psi1_a);
    w.kv("diam_s", p.diam_s);
    w.kv("eta", p.eta.to_string());
    w.kv("kappa", p.kappa.to_string());
    w.kv("iota", p.iota.to_string());
    w.kv("n_grid", join(s.n_grid));
    w.kv("delta_grid", join(s.delta_grid));
  }
  if (c.verify) {
    const auto& s = *c.verify;
    w.section("verify");
    w.kv("problems", join(s.problems));
    w.kv("quadruples", std::uint64_t{s.quadruples});
    w.kv("variance_points", std::uint64_t{s.variance_points});
    w.kv("eigengap_draws", std::uint64_t{s.eigengap_draws});
    w.kv("entropic_quadruples", std::uint64_t{s.entropic_quadruples});
    w.kv("entropic_densities", std::uint64_t{s.entropic_densities});
    w.kv("seed", s.seed);
  }
  if (c.mcdiarmid) {
    const auto& s = *c.mcdiarmid;
    w.section("mcdiarmid");
    w.kv("n", std::uint64_t{s.n});
    w.kv("reps", std::uint64_t{s.reps});
    w.kv("p_bad", s.p_bad);
    w.kv("t_grid", join(s.t_grid));
    w.kv("seed", s.seed);
  }
  w.section("tolerances");
  w.kv("quadruple", c.tolerances.quadruple);
  w.kv("variance", c.tolerances.variance);
  w.kv("euclidean_variance", c.tolerances.euclidean_variance);
  w.kv("entropic_quadruple", c.tolerances.entropic_quadruple);
  return w.str();
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
  auto opt_eq = [](const auto& x, const auto& y, auto eq) { return x.has_value() == y.has_value() && (!x || eq(*x, *y)); };
  auto exp_eq = [](const ExperimentSection& x, const ExperimentSection& y) {
    return x.problem == y.problem && x.n_grid == y.n_grid && x.reps == y.reps && x.base_seed == y.base_seed &&
           x.delta == y.delta && x.delta_grid == y.delta_grid && x.threads == y.threads && x.timing == y.timing &&
           x.out == y.out;
  };
  auto euc_eq = [](const EuclideanConfig& x, const EuclideanConfig& y) {
    return x.family == y.family && same(x.mean, y.mean) && same(x.scale, y.scale) && x.a_scale == y.a_scale &&
           x.calibration_draws == y.calibration_draws && x.calibration_seed == y.calibration_seed;
  };
  auto spi_eq = [](const SpiderConfig& x, const SpiderConfig& y) {
    return x.leg_probs == y.leg_probs && x.leg_lengths == y.leg_lengths && x.a_scale == y.a_scale &&
           x.calibration_draws == y.calibration_draws && x.calibration_seed == y.calibration_seed;
  };
  auto eig_eq = [](const EigenvectorConfig& x, const EigenvectorConfig& y) {
    return same(x.spectrum, y.spectrum) && x.rotate == y.rotate && x.rotation_seed == y.rotation_seed &&
           x.a_scale == y.a_scale;
  };
  auto las_eq = [](const LassoConfig& x, const LassoConfig& y) {
    return same(x.phi0, y.phi0) && x.feature_correlation == y.feature_correlation && x.noise_sd == y.noise_sd &&
           x.lambda == y.lambda && x.solver_tol == y.solver_tol && x.estimate_seed == y.estimate_seed;
  };
  auto ent_eq = [](const EntropicConfig& x, const EntropicConfig& y) {
    return x.nodes == y.nodes && x.lambda == y.lambda && x.pool_size == y.pool_size && x.bumps == y.bumps &&
           x.width_min == y.width_min && x.width_max == y.width_max && x.dirichlet_alpha == y.dirichlet_alpha &&
           x.pool_seed == y.pool_seed && x.solver_tol == y.solver_tol && x.step0 == y.step0;
  };
  auto bnd_eq = [](const BoundSection& x, const BoundSection& y) {
    return x.problem == y.problem && x.params == y.params && x.n_grid == y.n_grid && x.delta_grid == y.delta_grid;
  };
  auto ver_eq = [](const VerifySection& x, const VerifySection& y) {
    return x.problems == y.problems && x.quadruples == y.quadruples && x.variance_points == y.variance_points &&
           x.eigengap_draws == y.eigengap_draws && x.entropic_quadruples == y.entropic_quadruples &&
           x.entropic_densities == y.entropic_densities && x.seed == y.seed;
  };
  auto mcd_eq = [](const McDiarmidSection& x, const McDiarmidSection& y) {
    return x.n == y.n && x.reps == y.reps && x.p_bad == y.p_bad && x.t_grid == y.t_grid && x.seed == y.seed;
  };
  const auto& ta = a.tolerances;
  const auto& tb = b.tolerances;
  return opt_eq(a.experiment, b.experiment, exp_eq) && opt_eq(a.euclidean, b.euclidean, euc_eq) &&
         opt_eq(a.spider, b.spider, spi_eq) && opt_eq(a.eigenvector, b.eigenvector, eig_eq) &&
         opt_eq(a.lasso, b.lasso, las_eq) && opt_eq(a.entropic, b.entropic, ent_eq) &&
         opt_eq(a.bound, b.bound, bnd_eq) && opt_eq(a.verify, b.verify, ver_eq) &&
         opt_eq(a.mcdiarmid, b.mcdiarmid, mcd_eq) && ta.quadruple == tb.quadruple && ta.variance == tb.variance &&
         ta.euclidean_variance == tb.euclidean_variance && ta.entropic_quadruple == tb.entropic_quadruple;
}

RunConfig parse_config(const std::string& text) {
  ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig cfg;
  for (const auto& [name, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + name + "' outside any section");
    Reader r(name, body);
    if (name == "experiment") cfg.experiment = read_experiment(r);
    else if (name == "euclidean") cfg.euclidean = read_euclidean(r);
    else if (name == "spider") cfg.spider = read_spider(r);
    else if (name == "eigenvector") cfg.eigenvector = read_eigenvector(r);
    else if (name == "lasso") cfg.lasso = read_lasso(r);
    else if (name == "entropic") cfg.entropic = read_entropic(r);
    else if (name == "bound") cfg.bound = read_bound(r);
    else if (name == "verify") cfg.verify = read_verify(r);
    else if (name == "mcdiarmid") cfg.mcdiarmid = read_mcdiarmid(r);
    else if (name == "tolerances") cfg.tolerances = read_tolerances(r);
    else throw ConfigError("unknown section [" + name + "]");
    r.finish();
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) { return serialize(cfg, false); }

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : serialize(cfg, true)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ermc
