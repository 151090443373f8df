#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ermc/commands.hpp"
#include "ermc/config.hpp"
#include "ermc/errors.hpp"

using namespace ermc;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ermc_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  std::ofstream(dir / name) << text;
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(ERMC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmallEuclidean = R"([experiment]
problem = euclidean
n_grid = 25,100,400,1600
reps = 100
base_seed = 4

[euclidean]
scale = 1,0.5
calibration_draws = 20000
)";

}  // namespace

TEST_CASE("config round trip") {
  const auto cfg = parse_config(kSmallEuclidean);
  REQUIRE(cfg.experiment);
  CHECK(cfg.experiment->reps == 100);
  CHECK(cfg.experiment->n_grid == std::vector<std::size_t>{25, 100, 400, 1600});
  REQUIRE(cfg.euclidean);
  CHECK(cfg.euclidean->calibration_draws == 20000);
  const auto back = parse_config(serialize_config(cfg));
  CHECK(back == cfg);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);
}

TEST_CASE("config hash ignores the output location and thread count") {
  auto a = parse_config(kSmallEuclidean), b = a;
  b.experiment->out = "elsewhere";
  b.experiment->threads = 4;
  CHECK(config_hash(a) == config_hash(b));
  b.experiment->base_seed = 5;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("config errors") {
  CHECK_THROWS_WITH(parse_config("[experiment]\nrepz = 100\n"), ContainsSubstring("unknown key 'repz'"));
  CHECK_THROWS_WITH(parse_config("[nonsense]\nx = 1\n"), ContainsSubstring("unknown section [nonsense]"));
  CHECK_THROWS_WITH(parse_config("[experiment]\nreps = 10\n"), ContainsSubstring("reps below minimum 100"));
  CHECK_THROWS_WITH(parse_config("[experiment]\nproblem = circle\n"), ContainsSubstring("circle"));
  CHECK_THROWS_AS(parse_config("[experiment]\nreps = many\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/ermc.ini"), IoError);
}

TEST_CASE("overrides take precedence") {
  auto cfg = parse_config(kSmallEuclidean);
  apply_overrides(cfg, CliOverrides{"o", 99, 2});
  CHECK(cfg.experiment->out == "o");
  CHECK(cfg.experiment->base_seed == 99);
  CHECK(cfg.experiment->threads == 2);
}

TEST_CASE("default McDiarmid t grid") {
  const auto t = default_t_grid(50);
  REQUIRE(t.size() == 10);
  CHECK(t.back() == Catch::Approx(std::min(0.5, 12.0 / std::sqrt(600.0))));
  CHECK(t.front() == Catch::Approx(t.back() / 10.0));
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  const auto ok = write_file(dir, "ok.ini", kSmallEuclidean);
  CHECK(cli("experiment --config " + ok.string() + " --out " + (dir / "run").string()) == kExitOk);
  CHECK(fs::exists(dir / "run" / "records.csv"));
  CHECK(fs::exists(dir / "run" / "report.json"));
  CHECK(fs::exists(dir / "run" / "plot.dat"));

  const auto regime = write_file(dir, "regime.ini", "[bound]\nbeta = 1.5\nalpha = 1.5\n");
  CHECK(cli("bound --config " + regime.string() + " --out " + dir.string()) == kExitConfig);
  const auto few = write_file(dir, "few.ini", "[experiment]\nreps = 10\n");
  CHECK(cli("experiment --config " + few.string()) == kExitConfig);
  CHECK(cli("experiment --config " + (dir / "missing.ini").string()) == kExitIo);
  CHECK(cli("experiment --config " + ok.string() + " --threads 0") == kExitConfig);
  CHECK(cli("frobnicate --config " + ok.string()) == kExitConfig);

  const auto none = write_file(dir, "none.ini", "[verify]\nproblems =\n");
  CHECK(cli("verify --config " + none.string() + " --out " + dir.string()) == kExitOk);

  const auto blocked = write_file(dir, "blocked", "a file where a directory should go");
  CHECK(cli("experiment --config " + ok.string() + " --out " + (blocked / "sub").string()) == kExitIo);
}

TEST_CASE("fault injection fails verification") {
  // halving a breaks the quadruple inequality
  const auto dir = scratch("fault");
  const std::string verify = "[verify]\nproblems = euclidean\nquadruples = 20000\nvariance_points = 1000\n";
  const auto good = write_file(dir, "good.ini", verify + "[euclidean]\ncalibration_draws = 20000\n");
  CHECK(cli("verify --config " + good.string() + " --out " + (dir / "good").string()) == kExitOk);
  const auto bad = write_file(dir, "bad.ini", verify + "[euclidean]\na_scale = 0.5\ncalibration_draws = 20000\n");
  CHECK(cli("verify --config " + bad.string() + " --out " + (dir / "bad").string()) == kExitAcceptance);
  const auto report = nlohmann::json::parse(slurp(dir / "bad" / "verify.json"));
  CHECK(report.dump().find("false") != std::string::npos);
}

TEST_CASE("outputs do not depend on threads or output directory") {
  const auto dir = scratch("determinism");
  const auto cfg = write_file(dir, "run.ini", kSmallEuclidean);
  REQUIRE(cli("experiment --config " + cfg.string() + " --threads 1 --out " + (dir / "a").string()) == 0);
  REQUIRE(cli("experiment --config " + cfg.string() + " --threads 3 --out " + (dir / "b").string()) == 0);
  for (const char* f : {"records.csv", "report.json", "plot.dat"}) CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  // the seed override changes the replication streams
  REQUIRE(cli("experiment --config " + cfg.string() + " --seed 77 --out " + (dir / "c").string()) == 0);
  CHECK(slurp(dir / "a" / "records.csv") != slurp(dir / "c" / "records.csv"));
}

TEST_CASE("bound command writes its table") {
  const auto dir = scratch("bound");
  const auto cfg = write_file(dir, "b.ini", "[bound]\nbeta = 2\nalpha = 1\ntau = 1\npsi1_a = 2\nn_grid = 100\n"
                                            "delta_grid = 0.05\n");
  std::ostringstream out, err;
  CHECK(run_command("bound", cfg.string(), CliOverrides{dir.string(), {}, {}}, out, err) == kExitOk);
  CHECK_THAT(out.str(), ContainsSubstring("config_hash="));
  const auto j = nlohmann::json::parse(slurp(dir / "bound.json"));
  CHECK(j.dump().find("7.617935988") != std::string::npos);
}
