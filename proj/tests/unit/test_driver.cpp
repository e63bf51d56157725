#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "zmgx/driver/config.hpp"
#include "zmgx/driver/run.hpp"

namespace fs = std::filesystem;
using namespace zmgx;
using namespace zmgx::driver;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("zmgx_driver_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// Data lines only; the header block starts with '#'.
std::vector<std::string> data_lines(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  return out;
}

int cli(const std::string& args, const fs::path& out_dir = {}) {
  std::string cmd;
  if (!out_dir.empty()) cmd = "ZMGX_OUTPUT_DIR='" + out_dir.string() + "' ";
  cmd += "'" + std::string(ZMGX_CLI_PATH) + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const std::string& name) { return std::string(ZMGX_CONFIG_DIR) + "/" + name; }

const char* kCritical = R"({
  "experiment": "branching-survival",
  "scenario": {"family": "table", "rows": [{"nu": 1, "a": 0.5, "p": 0.5}]},
  "horizon": 100
})";

}  // namespace

TEST(Config, ParsesSampleConfigs) {
  for (const auto& entry : fs::directory_iterator(ZMGX_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
  }
}

TEST(Config, EchoIsAFixedPoint) {
  for (const auto& entry : fs::directory_iterator(ZMGX_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    const RunConfig c = load_config(entry.path().string());
    const json once = to_json(c);
    const json twice = to_json(parse_config(once));
    EXPECT_EQ(once, twice) << entry.path();
    EXPECT_EQ(config_sha(c), config_sha(parse_config(once)));
  }
}

TEST(Config, IndicesAndHorizon) {
  const RunConfig c = parse_config_text(kCritical);
  EXPECT_EQ(c.horizon, 100u);
  ASSERT_EQ(c.indices.size(), 100u);
  EXPECT_EQ(c.indices.front(), 1u);
  const RunConfig r = load_config(config("max_limit_power.json"));
  EXPECT_EQ(r.indices.front(), 10u);
  EXPECT_EQ(r.indices.back(), 40u);
  EXPECT_EQ(r.horizon, 40u);
}

TEST(Config, BirthDeathTimeRule) {
  const RunConfig c = load_config(config("maxfam_birth_death.json"));
  const auto& bd = std::get<scenario::BirthDeath>(c.scenario);
  ASSERT_EQ(bd.times.size(), 20u);
  EXPECT_DOUBLE_EQ(bd.times[4], 25.0);
}

TEST(Config, ParseErrors) {
  EXPECT_THROW(parse_config_text("{ not json"), ConfigParseError);
}

TEST(Config, ValidationErrors) {
  auto bad = [](const std::string& text) { EXPECT_THROW(parse_config_text(text), ConfigValidationError) << text; };
  bad(R"({"experiment": "nope", "scenario": {"family": "table", "rows": [{"nu": 1, "a": 0.5, "p": 0.5}]}, "horizon": 3})");
  bad(R"({"experiment": "max-limit", "scenario": {"family": "table", "rows": [{"nu": 1, "a": 0.5, "p": 0.5}]}, "horizon": 3, "extra": 1})");
  bad(R"({"experiment": "max-limit", "scenario": {"family": "birth-death", "lambda": 1, "mu": 1, "times": [1, 2]}, "horizon": 2})");
  bad(R"({"experiment": "maxfam-limit", "scenario": {"family": "power"}, "horizon": 5})");
  bad(R"({"experiment": "maxfam-limit", "scenario": {"family": "table", "rows": [{"nu": 1, "a": 0.5, "p": 0.5}]}, "horizon": 5, "mc": {"paths": 10}})");
  bad(R"({"experiment": "max-limit", "scenario": {"family": "table", "rows": [{"nu": 1, "a": 0.5, "p": 0.5}]}, "horizon": 3, "limit": {"kind": "maxfam-divergent", "alpha": 0, "p": 0.5}})");
  bad(R"({"experiment": "max-limit", "scenario": {"family": "table", "rows": [{"nu": 1, "a": 1.5, "p": 0.5}]}, "horizon": 3})");
  bad(R"({"experiment": "max-limit", "scenario": {"family": "power", "delta": -1}, "horizon": 3})");
  bad(R"({"experiment": "max-limit", "scenario": {"family": "table", "rows": [{"nu": 1, "a": 0.5, "p": 0.5}]}, "horizon": 3, "grid": {"levels": [1.5]}})");
  bad(R"({"experiment": "regimes", "scenario": {"family": "power"}, "horizon": 5})");
  bad(R"({"experiment": "maxfam-limit", "scenario": {"family": "table", "rows": [{"nu": 1, "a": 0.5, "p": 0.5}]}, "horizon": 5})");
}

TEST(Output, CsvFormatting) {
  Table t{"", {"n", "x", "label"}, {}};
  t.add(std::uint64_t{3}, 0.1, std::string("ok"));
  t.add(std::uint64_t{4}, std::numeric_limits<double>::infinity(), std::string("big"));
  EXPECT_THROW(t.add(1, 2.0), std::logic_error);
  const std::string csv = render_csv(Header{"abc", 9, "rng-id", "max-limit"}, t);
  EXPECT_EQ(csv,
            "# config_sha: abc\n# seed: 9\n# rng: rng-id\n# version: 0.1.0\n# experiment: max-limit\n"
            "n,x,label\n3,0.10000000000000001,ok\n4,inf,big\n");
  const json j = json::parse(render_json(Header{"abc", 9, "rng-id", "max-limit"}, t));
  EXPECT_EQ(j["rows"][1][1], "inf");
  EXPECT_EQ(j["columns"][2], "label");
}

TEST(Output, Sha256KnownAnswer) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Run, ColumnSchemas) {
  struct Case {
    const char* file;
    std::vector<std::pair<std::string, std::string>> schemas;  // file suffix, header line
  };
  const std::vector<Case> cases{
      {"max_limit_power.json",
       {{"power_max-limit.csv", "n,nu,a,p,alpha_n,x,exact_cdf,limit_cdf,abs_diff"},
        {"power_max-limit_summary.csv", "n,nu,sup_distance"}}},
      {"min_limit.json",
       {{"min_min-limit.csv", "n,nu,a,p,beta_n,y,exact_cdf,limit_cdf,abs_diff"},
        {"min_min-limit_summary.csv", "n,nu,sup_distance"}}},
      {"range.json",
       {{"range_range.csv", "n,nu,a,p,r,range_cdf,max_cdf,abs_diff"},
        {"range_range_mc.csv", "n,paths,ks_distance_range,ks_critical_0.01"}}},
      {"band_sweep_constant_p.json",
       {{"band_p_band-sweep.csv", "n,center,x,exact_cdf,band_low,band_high,violation"},
        {"band_p_band-sweep_summary.csv", "n,max_violation,within_tolerance"}}},
      {"branching_survival_critical.json",
       {{"critical_branching-survival.csv", "n,m,log_M,M,B,A,survival,log_survival"},
        {"critical_branching-survival_mc.csv", "n,paths,survivors,empirical_survival,exact_survival,binomial_sd"}}},
      {"conditioned_law.json", {{"conditioned_conditioned-law.csv", "n,B,k,pmf,cdf,k_over_B,exponential_cdf"}}},
      {"maxfam_birth_death.json",
       {{"maxfam_maxfam-limit.csv", "n,B_prev,alpha_star,x,exact_cdf,limit_cdf,abs_diff"},
        {"maxfam_maxfam-limit_mc_cdf.csv", "k,empirical_cdf,exact_cdf"}}},
      {"large_deviation.json", {{"ld_large-deviation.csv", "n,nu,a,p,alpha_n,x,ratio"}}},
      {"regimes_log_power.json", {{"regimes_regimes.csv", "quantity,trend,slope,limit,inconclusive"}}},
  };
  const fs::path dir = scratch("schemas");
  for (const auto& c : cases) {
    RunConfig cfg = load_config(config(c.file));
    cfg.output.dir = dir.string();
    const RunResult r = run(cfg);
    ASSERT_EQ(r.exit_code, 0) << c.file << ": " << r.message;
    for (const auto& [file, header] : c.schemas) {
      const auto lines = data_lines(dir / file);
      ASSERT_FALSE(lines.empty()) << file;
      EXPECT_EQ(lines[0], header) << file;
      EXPECT_GT(lines.size(), 1u) << file;
    }
  }
}

TEST(Run, HeaderBlock) {
  const fs::path dir = scratch("header");
  RunConfig cfg = parse_config_text(kCritical);
  cfg.output.dir = dir.string();
  cfg.mc.seed = 1234;
  ASSERT_EQ(run(cfg).exit_code, 0);
  std::istringstream in(slurp(dir / "run_branching-survival.csv"));
  std::string l1, l2, l3, l4;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  std::getline(in, l4);
  EXPECT_EQ(l1, "# config_sha: " + config_sha(cfg));
  EXPECT_EQ(l2, "# seed: 1234");
  EXPECT_EQ(l3, std::string("# rng: ") + kRngIdentity);
  EXPECT_EQ(l4, std::string("# version: ") + kVersion);
}

TEST(Run, CriticalSurvivalColumn) {
  const fs::path dir = scratch("critical");
  RunConfig cfg = parse_config_text(kCritical);
  cfg.output.dir = dir.string();
  ASSERT_EQ(run(cfg).exit_code, 0);
  const auto lines = data_lines(dir / "run_branching-survival.csv");
  ASSERT_EQ(lines.size(), 101u);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i]);
    const double n = std::stod(f[0]);
    EXPECT_NEAR(std::stod(f[6]), 1.0 / (1.0 + n), 1e-12);
  }
}

TEST(Run, MaxLimitSupDistanceShrinks) {
  const fs::path dir = scratch("maxlimit");
  RunConfig cfg = load_config(config("max_limit_power.json"));
  cfg.output.dir = dir.string();
  ASSERT_EQ(run(cfg).exit_code, 0);
  const auto lines = data_lines(dir / "power_max-limit_summary.csv");
  ASSERT_EQ(lines.size(), 32u);
  const double first = std::stod(split(lines[1])[2]);
  const double last = std::stod(split(lines.back())[2]);
  for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_GT(std::stod(split(lines[i])[2]), 0.0);
  EXPECT_LT(last, first);
}

TEST(Run, InsufficientSurvivorsExitCode) {
  RunConfig cfg = parse_config_text(R"({
    "experiment": "maxfam-limit",
    "scenario": {"family": "table", "rows": [{"nu": 1, "a": 0.02, "p": 0.5}]},
    "index_range": [2, 4], "mc": {"paths": 1000, "seed": 1}
  })");
  const fs::path dir = scratch("insufficient");
  cfg.output.dir = dir.string();
  const RunResult r = run(cfg);
  EXPECT_EQ(r.exit_code, kExitInsufficientSurvivors);
  EXPECT_TRUE(fs::is_empty(dir));
}

TEST(Run, OverflowExitCode) {
  RunConfig cfg = parse_config_text(R"({
    "experiment": "branching-survival",
    "scenario": {"family": "birth-death", "lambda": 30, "mu": 1, "time_rule": {"scale": 1, "exponent": 1}},
    "horizon": 40
  })");
  cfg.output.dir = scratch("overflow").string();
  EXPECT_EQ(run(cfg).exit_code, kExitOverflow);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli_codes");
  write_file(dir / "broken.json", "{ \"experiment\": ");
  write_file(dir / "invalid.json", R"({"experiment": "max-limit", "scenario": {"family": "power", "delta": -1}, "horizon": 3})");
  write_file(dir / "dying.json", R"({"experiment": "maxfam-limit",
    "scenario": {"family": "table", "rows": [{"nu": 1, "a": 0.02, "p": 0.5}]}, "index_range": [2, 4], "mc": {"paths": 1000}})");
  EXPECT_EQ(cli("run '" + (dir / "broken.json").string() + "'", dir / "o"), kExitParse);
  EXPECT_EQ(cli("run '" + (dir / "missing.json").string() + "'", dir / "o"), kExitParse);
  EXPECT_EQ(cli("run '" + (dir / "invalid.json").string() + "'", dir / "o"), kExitValidation);
  EXPECT_EQ(cli("run '" + (dir / "dying.json").string() + "'", dir / "o"), kExitInsufficientSurvivors);
  EXPECT_EQ(cli("frobnicate"), kExitUsage);
  EXPECT_EQ(cli("version"), 0);
  EXPECT_EQ(cli("config echo '" + config("joint.json") + "'"), 0);
}

TEST(Cli, OutputDirOverrideAndSeedFlag) {
  const fs::path dir = scratch("cli_env");
  ASSERT_EQ(cli("run '" + config("branching_survival_critical.json") + "' --seed 99", dir), 0);
  const fs::path mc = dir / "critical_branching-survival_mc.csv";
  ASSERT_TRUE(fs::exists(mc));
  EXPECT_NE(slurp(mc).find("# seed: 99\n"), std::string::npos);
}

TEST(Cli, DeterministicAcrossWorkers) {
  const fs::path a = scratch("cli_w1"), b = scratch("cli_w4");
  ASSERT_EQ(cli("run '" + config("maxfam_birth_death.json") + "' --workers 1", a), 0);
  ASSERT_EQ(cli("run '" + config("maxfam_birth_death.json") + "' --workers 4", b), 0);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
    ++compared;
  }
  EXPECT_EQ(compared, 4u);
}
