#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oslab/error.hpp"
#include "oslab/experiment.hpp"
#include "oslab/random.hpp"

using namespace oslab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("oslab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json derivative_config() {
  return {{"schema", 1},
          {"command", "derivative"},
          {"seed", 11},
          {"instance", {{"kind", "random_psd_pair"}, {"dim", 3}}},
          {"order", 2}};
}

RunOptions options_for(const fs::path& out) {
  RunOptions o;
  o.out_dir = out;
  return o;
}

}  // namespace

TEST(Instance, SeededAndDeterministic) {
  const json spec{{"kind", "random_psd_pair"}, {"dim", 4}};
  const auto a = generate_instance(spec, 5);
  const auto b = generate_instance(spec, 5);
  EXPECT_EQ(a.h.entries(), b.h.entries());
  EXPECT_EQ(a.v.entries(), b.v.entries());
  EXPECT_EQ(a.spec["seed"], 5);
  EXPECT_NE(generate_instance(spec, 6).h.entries(), a.h.entries());
  EXPECT_GE(a.v.min_eigenvalue(), -1e-12);
  const auto nsd = generate_instance({{"kind", "random_psd_pair"}, {"dim", 4}, {"variant", "nsd"}}, 5);
  EXPECT_LE(nsd.v.max_eigenvalue(), 1e-12);
  EXPECT_THROW(generate_instance(spec, std::nullopt), ConfigError);
}

TEST(Instance, DimensionOneAndErrors) {
  const auto one = generate_instance({{"kind", "random_goe"}, {"dim", 1}}, 3);
  EXPECT_EQ(one.h.dim(), 1u);
  try {
    generate_instance({{"kind", "random_goe"}, {"dim", 0}}, 3);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "instance.dim");
  }
  EXPECT_THROW(generate_instance({{"kind", "nope"}, {"dim", 2}}, 3), ConfigError);
}

TEST(Instance, SeedsAreSpread) {
  EXPECT_NE(instance_seed(1, 0), instance_seed(1, 1));
  EXPECT_NE(instance_seed(1, 0), instance_seed(2, 0));
  EXPECT_EQ(instance_seed(9, 4), instance_seed(9, 4));
}

TEST(Run, DerivativePassesAndIsDeterministic) {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  std::ostringstream err;
  ASSERT_EQ(run(derivative_config(), options_for(a), err), 0) << err.str();
  ASSERT_EQ(run(derivative_config(), options_for(b), err), 0) << err.str();
  for (const char* f : {"summary.json", "psi.csv", "derivative.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Run, MissingFieldIsUsageError) {
  json cfg = derivative_config();
  cfg.erase("instance");
  std::ostringstream err;
  EXPECT_EQ(run(cfg, options_for(fresh_dir("missing")), err), 2);
  EXPECT_NE(err.str().find("instance"), std::string::npos);

  json bad_dim = derivative_config();
  bad_dim["instance"]["dim"] = -3;
  std::ostringstream err2;
  EXPECT_EQ(run(bad_dim, options_for(fresh_dir("bad_dim")), err2), 2);
  EXPECT_NE(err2.str().find("instance.dim"), std::string::npos) << err2.str();

  json bad_tol = derivative_config();
  bad_tol["tolerances"] = {{"fd", -1.0}};
  std::ostringstream err3;
  EXPECT_EQ(run(bad_tol, options_for(fresh_dir("bad_tol")), err3), 2);
  EXPECT_NE(err3.str().find("tolerances.fd"), std::string::npos) << err3.str();
}

TEST(Run, BrokenToleranceWritesReplay) {
  json cfg = derivative_config();
  cfg["tolerances"] = {{"fd", 1e-300}};
  const fs::path out = fresh_dir("replay");
  std::ostringstream err;
  ASSERT_EQ(run(cfg, options_for(out), err), 1);
  const fs::path replay = out / "replay" / "replay.json";
  ASSERT_TRUE(fs::exists(replay));
  ASSERT_TRUE(fs::exists(out / "replay" / "h.json"));

  const json again = load_config(replay);
  EXPECT_EQ(again["instance"]["kind"], "file");
  RunOptions o = options_for(fresh_dir("replay_again"));
  o.base_dir = replay.parent_path();
  std::ostringstream err2;
  EXPECT_EQ(run(again, o, err2), 1);
  // Same matrices, same failing value.
  const json s1 = json::parse(slurp(out / "summary.json"));
  const json s2 = json::parse(slurp(o.out_dir / "summary.json"));
  EXPECT_EQ(s1["verdicts"], s2["verdicts"]);
}

TEST(Run, EachCommandOnSmallInstances) {
  const json psd{{"kind", "random_psd_pair"}, {"dim", 3}};
  const std::vector<json> configs{
      {{"schema", 1}, {"command", "remainder"}, {"seed", 2}, {"instance", psd}, {"order", 2}},
      {{"schema", 1}, {"command", "ssf"}, {"seed", 3}, {"instance", psd}, {"order", 2}, {"grid_size", 200}},
      {{"schema", 1}, {"command", "bmv"}, {"seed", 4}, {"instance", psd}},
      {{"schema", 1},
       {"command", "truncation"},
       {"instance", {{"kind", "diagonal_model"}, {"m", 0.0}, {"gamma", 1.0}, {"rho", 0.5}}},
       {"order", 1},
       {"p_list", {4, 8, 16}},
       {"grid_size", 400}},
  };
  int k = 0;
  for (const auto& cfg : configs) {
    std::ostringstream err;
    EXPECT_EQ(run(cfg, options_for(fresh_dir("cmd" + std::to_string(k++))), err), 0)
        << cfg["command"] << ": " << err.str();
  }
}

TEST(Run, VerifyAllPasses) {
  const fs::path out = fresh_dir("verify_all");
  RunOptions o = options_for(out);
  o.jobs = 2;
  std::ostringstream err;
  EXPECT_EQ(run({{"schema", 1}, {"command", "verify-all"}, {"seed", 7}}, o, err), 0) << err.str();
  const std::string csv = slurp(out / "verify_all.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "index,name,command,pass");
  EXPECT_EQ(csv.find(",0\n"), std::string::npos) << csv;
}

TEST(Config, SchemaAndCommand) {
  EXPECT_THROW(validate_config({{"command", "ssf"}, {"instance", json::object()}}), ConfigError);
  EXPECT_THROW(validate_config({{"schema", 2}, {"command", "ssf"}, {"instance", json::object()}}), ConfigError);
  EXPECT_THROW(validate_config({{"schema", 1}, {"command", "fly"}, {"instance", json::object()}}), ConfigError);
  EXPECT_NO_THROW(validate_config({{"schema", 1}, {"command", "verify-all"}}));
  EXPECT_EQ(default_suite().size(), 9u);
}
