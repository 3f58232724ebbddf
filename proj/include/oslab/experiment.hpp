#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "oslab/error.hpp"
#include "oslab/spectral.hpp"

namespace oslab {

inline constexpr int kConfigSchema = 1;

/// Configuration problem; the message starts with the offending field path.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& path, const std::string& what) : InvalidArgument(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct Instance {
  SymmetricOperator h;
  SymmetricOperator v;
  /// The resolved instance spec (seed filled in).
  nlohmann::json spec;
};

/// Builds (H, V) from an instance spec:
///   {"kind": "random_psd_pair", "dim": 4, "seed": 7, "variant": "psd" | "nsd"}
///   {"kind": "random_goe", "dim": 4, "seed": 7}
///   {"kind": "diagonal_model", "p": 16, "m": 0, "gamma": 1, "rho": 0.5, "kernel": "decaying_factor"}
///   {"kind": "file", "h": "h.json", "v": "v.csv"}
/// Optional "v_scale" multiplies V. `seed` (when set) is used if the spec has
/// none; random kinds without any seed are rejected. Relative file paths
/// resolve against `base_dir`. `path` prefixes error messages.
Instance generate_instance(const nlohmann::json& spec, std::optional<std::uint64_t> seed,
                           const std::filesystem::path& base_dir = {}, const std::string& path = "instance");

struct Verdict {
  std::string name;
  bool pass = true;
  double value = 0.0;
  double tolerance = 0.0;
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  /// Directory that relative paths inside the config refer to.
  std::filesystem::path base_dir;
  /// Human-readable progress; null silences it.
  std::ostream* log = nullptr;
};

struct RunResult {
  std::string command;
  bool pass = true;
  std::vector<Verdict> verdicts;
  nlohmann::json summary;
  /// The instance behind the run, kept for replay.
  std::optional<Instance> instance;
};

/// Validates the top level ("schema" must be 1, "command" known).
void validate_config(const nlohmann::json& config);

/// Executes one config and writes its artifacts under options.out_dir.
/// Throws ConfigError / InvalidArgument on usage problems.
RunResult execute(const nlohmann::json& config, const RunOptions& options);

/// execute() plus the exit-code contract: 0 all verdicts pass, 1 a verdict
/// failed (a replay config and the matrices are written to out_dir/replay),
/// 2 a usage or config error (message on `err`).
int run(const nlohmann::json& config, const RunOptions& options, std::ostream& err);

/// Reads and parses a JSON config file.
nlohmann::json load_config(const std::filesystem::path& path);

/// The built-in verify-all fixture suite.
nlohmann::json default_suite();

}  // namespace oslab
