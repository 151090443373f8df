#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ermc/bounds.hpp"
#include "ermc/problems.hpp"
#include "ermc/transport.hpp"

namespace ermc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentSection {
  std::string problem = "euclidean";
  std::vector<std::size_t> n_grid = {25, 100, 400, 1600};
  std::size_t reps = 2000;
  std::uint64_t base_seed = 1;
  double delta = 0.05;
  std::vector<double> delta_grid = {0.2, 0.1, 0.05, 0.01};
  unsigned threads = 1;
  bool timing = false;  // real wall times in the CSV; off keeps output byte-stable
  std::string out = "out";
};

// Explicit constants for `bound`; when `problem` is set the constants come
// from that problem block instead.
struct BoundSection {
  std::string problem;
  ConcentrationParams params;
  std::vector<std::size_t> n_grid = {100};
  std::vector<double> delta_grid = {0.05};
};

struct VerifySection {
  std::vector<std::string> problems = {"euclidean", "spider", "eigenvector", "entropic"};
  std::size_t quadruples = 100000;
  std::size_t variance_points = 10000;
  std::size_t eigengap_draws = 10000;
  std::size_t entropic_quadruples = 1000;
  std::size_t entropic_densities = 100;
  std::uint64_t seed = 7;
};

struct McDiarmidSection {
  std::size_t n = 50;
  std::size_t reps = 10000;
  double p_bad = 0.01;
  std::vector<double> t_grid;  // empty: ten points spread over the observed range
  std::uint64_t seed = 11;
};

struct Tolerances {
  double quadruple = 1e-9;
  double variance = 1e-9;
  double euclidean_variance = 1e-12;
  double entropic_quadruple = 1e-8;
};

struct RunConfig {
  std::optional<ExperimentSection> experiment;
  std::optional<EuclideanConfig> euclidean;
  std::optional<SpiderConfig> spider;
  std::optional<EigenvectorConfig> eigenvector;
  std::optional<LassoConfig> lasso;
  std::optional<EntropicConfig> entropic;
  std::optional<BoundSection> bound;
  std::optional<VerifySection> verify;
  std::optional<McDiarmidSection> mcdiarmid;
  Tolerances tolerances;
};

bool operator==(const RunConfig& a, const RunConfig& b);

// INI text with one section per block; unknown sections or keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

// FNV-1a over the canonical text, leaving out keys that cannot change results
// (output directory, thread count).
std::string config_hash(const RunConfig& cfg);

}  // namespace ermc
