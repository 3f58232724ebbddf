#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "oslab/experiment.hpp"

namespace {

int resolve_jobs(int cli_jobs) {
  if (cli_jobs > 0) return cli_jobs;
  if (const char* env = std::getenv("OSLAB_JOBS")) {
    try {
      const int j = std::stoi(env);
      if (j > 0) return j;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring OSLAB_JOBS='" << env << "'\n";
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator-perturbation experiment runner"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int jobs = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"derivative", "operator derivative vs finite differences, derivative-trace signs"},
      {"remainder", "Taylor remainder in three forms"},
      {"ssf", "spectral shift density, mass, closure, positivity"},
      {"bmv", "Bernstein / completely monotone fits of trace functions"},
      {"truncation", "convergence under finite-section truncation"},
      {"verify-all", "run a suite of configs and summarise"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "base seed (overrides the config)");
    sub->add_option("--jobs", jobs, "worker threads (fallback: OSLAB_JOBS)")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  nlohmann::json config;
  try {
    config = oslab::load_config(config_path);
    if (!config.is_object()) throw oslab::ConfigError("<root>", "expected an object");
    if (!config.contains("command")) config["command"] = command;
    if (config["command"] != command) {
      throw oslab::ConfigError("command", "config says " + config["command"].dump() + " but the CLI asked for '" +
                                              command + "'");
    }
  } catch (const oslab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  oslab::RunOptions options;
  options.out_dir = out_dir;
  options.seed = seed;
  options.jobs = resolve_jobs(jobs);
  options.base_dir = std::filesystem::absolute(config_path).parent_path();
  options.log = &std::cerr;
  const int code = oslab::run(config, options, std::cerr);
  std::cout << command << ": " << (code == 0 ? "pass" : code == 1 ? "FAIL" : "error") << '\n';
  return code;
}
