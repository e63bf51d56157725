// zmgx command-line driver.
//
//   zmgx run <config> [--seed N] [--workers N]
//   zmgx config echo <config>
//   zmgx version
//
// ZMGX_OUTPUT_DIR, when set, replaces output.dir from the config.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "zmgx/driver/config.hpp"
#include "zmgx/driver/run.hpp"

namespace drv = zmgx::driver;

namespace {

int load(const std::string& path, drv::RunConfig& out) {
  try {
    out = drv::load_config(path);
    return drv::kExitOk;
  } catch (const drv::ConfigParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return drv::kExitParse;
  } catch (const drv::ConfigValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return drv::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return drv::kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extremes of zero-modified geometric arrays and branching processes"};
  app.require_subcommand(1);

  std::string run_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", run_path, "Config file (JSON)")->required();
  run->add_option("--seed", seed, "Override mc.seed");
  run->add_option("--workers", workers, "Override mc.workers");

  std::string echo_path;
  auto* config = app.add_subcommand("config", "Config utilities");
  config->require_subcommand(1);
  auto* echo = config->add_subcommand("echo", "Print the canonical form of a config");
  echo->add_option("config", echo_path, "Config file (JSON)")->required();

  auto* version = app.add_subcommand("version", "Print version and RNG identity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : drv::kExitUsage;
  }

  if (version->parsed()) {
    std::cout << "zmgx " << drv::kVersion << "\nrng " << zmgx::kRngIdentity << "\n";
    return 0;
  }

  if (echo->parsed()) {
    drv::RunConfig c;
    if (int rc = load(echo_path, c)) return rc;
    std::cout << drv::to_json(c).dump(2) << "\n";
    return 0;
  }

  drv::RunConfig c;
  if (int rc = load(run_path, c)) return rc;
  if (seed) c.mc.seed = *seed;
  if (workers) c.mc.workers = *workers;
  if (const char* dir = std::getenv("ZMGX_OUTPUT_DIR"); dir && *dir) c.output.dir = dir;

  const drv::RunResult res = drv::run(c);
  for (const auto& f : res.files) std::cout << f.string() << "\n";
  if (res.exit_code != 0) std::cerr << "error: " << res.message << "\n";
  return res.exit_code;
}
