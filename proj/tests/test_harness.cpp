#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "spdelab/config.hpp"
#include "spdelab/experiments.hpp"
#include "spdelab/run_record.hpp"

using namespace spdelab;

namespace {

std::string temp_out(const char* tag) {
  auto dir = std::filesystem::temp_directory_path() / ("spdelab_test_" + std::string(tag));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("config parsing: comments, whitespace, precision") {
  const Config c = Config::parse_string(
      "# a comment\n"
      "experiment = theta\n"
      "gamma = 0.1000000000000000055511151231257827  # inline comment\n"
      "mc_paths = 12\n"
      "flag = true\n"
      "ladder = 0.5, 1.0, 2.0\n");
  CHECK(c.require_string("experiment") == "theta");
  CHECK(c.get_double("gamma", 0.0) == 0.1);
  CHECK(c.get_int("mc_paths", 0) == 12);
  CHECK(c.get_bool("flag", false));
  CHECK(c.get_list("ladder", {}).size() == 3);
  CHECK(c.get_double("missing", 7.5) == 7.5);
  CHECK_THROWS_AS(c.require_string("missing"), std::invalid_argument);

  CHECK_THROWS_AS(Config::parse_string("novalue\n"), std::invalid_argument);
  CHECK_THROWS_AS(Config::parse_string("a = 1\na = 2\n"), std::invalid_argument);
  CHECK_THROWS_AS(Config::parse_string("x = notanumber\n").get_double("x", 0.0),
                  std::invalid_argument);
}

TEST_CASE("config: unknown keys are rejected, hash is canonical") {
  const Config c = Config::parse_string("b = 2\na = 1\n");
  CHECK_NOTHROW(c.validate_keys({"a", "b"}));
  CHECK_THROWS_AS(c.validate_keys({"a"}), std::invalid_argument);

  const Config d = Config::parse_string("a = 1\nb = 2\n");
  CHECK(c.hash() == d.hash());
  CHECK(c.canonical() == "a = 1\nb = 2\n");
  const Config e = Config::parse_string("a = 1\nb = 3\n");
  CHECK(c.hash() != e.hash());
}

TEST_CASE("run record json and exit codes") {
  RunRecord r;
  r.experiment = "theta";
  r.config_hash = "abc";
  r.seed = 42;
  r.payload["x"] = 1.5;
  const auto j = r.to_json();
  CHECK(j["experiment"] == "theta");
  CHECK(j["payload"]["x"] == 1.5);
  CHECK(exit_code_for(r) == 0);
  r.status = "fail";
  CHECK(exit_code_for(r) == 2);
  r.status = "floor";
  CHECK(exit_code_for(r) == 3);
  // fingerprint excludes wall time
  RunRecord a = r, b = r;
  a.wall_time_sec = 1.0;
  b.wall_time_sec = 2.0;
  CHECK(a.numeric_fingerprint() == b.numeric_fingerprint());
}

TEST_CASE("exp_theta: burgers passes, linear flux records the degeneracy") {
  const std::string out = temp_out("theta");
  Config c = Config::parse_string(
      "experiment = theta\nmodel.kind = burgers\nmaster_seed = 7\n");
  c.set("output_dir", out);
  const RunRecord rec = exp_theta(c);
  CHECK(rec.status == "pass");
  CHECK(rec.payload["theta"]["theta_hat"].get<double>() == doctest::Approx(1.0).epsilon(0.1));
  CHECK(std::filesystem::exists(out + "/theta.jsonl"));

  Config lin = Config::parse_string(
      "experiment = theta\nmodel.kind = linear\nmaster_seed = 7\n");
  lin.set("output_dir", out);
  const RunRecord bad = exp_theta(lin);
  CHECK(bad.status == "fail");
  CHECK(bad.payload["error_kind"] == "degenerate");
  CHECK(exit_code_for(bad) == 2);
}

TEST_CASE("exp_theta rejects unknown keys") {
  Config c = Config::parse_string("experiment = theta\nmodle.kind = burgers\n");
  CHECK_THROWS_AS(exp_theta(c), std::invalid_argument);
}

TEST_CASE("exp_simulate: determinism across worker counts and reruns") {
  const std::string out = temp_out("sim");
  auto make = [&](int workers) {
    Config c = Config::parse_string(
        "experiment = simulate\n"
        "model.kind = burgers\n"
        "grid.cells = 64\n"
        "u0.kind = sin\n"
        "u0.amplitude = 0.5\n"
        "solver.scheme = pathwise\n"
        "solver.t_end = 0.25\n"
        "solver.record_every = 0.05\n"
        "path.kind = brownian\n"
        "path.knots_per_unit = 256\n"
        "master_seed = 12345\n");
    c.set("output_dir", out);
    c.set("workers", std::to_string(workers));
    return exp_simulate(c);
  };
  const RunRecord r1 = make(1);
  const RunRecord r2 = make(2);
  const RunRecord r8 = make(8);
  CHECK(r1.status == "pass");
  // workers key participates in the hash but not in any numerics
  auto strip = [](RunRecord r) {
    r.config_hash = "";
    return r.numeric_fingerprint();
  };
  CHECK(strip(r1) == strip(r2));
  CHECK(strip(r1) == strip(r8));
  CHECK(std::filesystem::exists(out));
}

TEST_CASE("exp_stability smoke on a small ladder") {
  const std::string out = temp_out("stab");
  Config c = Config::parse_string(
      "experiment = stability\n"
      "model.kind = burgers\n"
      "model.eps = 2e-3\n"
      "model.mollifier_width = 1e-3\n"
      "grid.cells = 64\n"
      "u0.kind = sin\n"
      "u0.amplitude = 0.5\n"
      "solver.t_end = 0.25\n"
      "path.knots_per_unit = 256\n"
      "levels.min = 3\n"
      "levels.max = 6\n"
      "mc_paths = 3\n"
      "master_seed = 99\n"
      "workers = 2\n");
  c.set("output_dir", out);
  const RunRecord rec = exp_stability(c);
  REQUIRE(rec.payload.contains("exponent_median"));
  CHECK(rec.payload["paths_used"].get<int>() == 3);
  // rate fits on tiny ladders are noisy; just demand a positive rate here
  CHECK(rec.payload["exponent_median"].get<double>() > 0.0);
}

TEST_CASE("exp_wongzakai smoke shares the campaign contract") {
  const std::string out = temp_out("wz");
  Config c = Config::parse_string(
      "experiment = wongzakai\n"
      "model.kind = burgers\n"
      "model.eps = 2e-3\n"
      "grid.cells = 64\n"
      "solver.t_end = 0.25\n"
      "path.knots_per_unit = 256\n"
      "levels.min = 3\n"
      "levels.max = 6\n"
      "mc_paths = 3\n"
      "master_seed = 99\n"
      "workers = 2\n");
  c.set("output_dir", out);
  const RunRecord rec = exp_wongzakai(c);
  REQUIRE(rec.payload.contains("median_cauchy"));
  const auto mc = rec.payload["median_cauchy"].get<std::vector<double>>();
  CHECK(mc.size() == 3);
}

TEST_CASE("exp_regularity rejects an inadmissible lambda") {
  const std::string out = temp_out("reg");
  Config c = Config::parse_string(
      "experiment = regularity\n"
      "model.kind = burgers\n"
      "grid.cells = 64\n"
      "lambda = 0.7\n"
      "mc_paths = 2\n"
      "solver.t_end = 0.25\n"
      "path.knots_per_unit = 128\n"
      "regularity.refine = false\n");
  c.set("output_dir", out);
  const RunRecord rec = exp_regularity(c);
  CHECK(rec.status == "fail");
  CHECK(rec.payload.contains("error"));
  const std::string msg = rec.payload["error"].get<std::string>();
  CHECK(msg.find("admissible") != std::string::npos);
}

TEST_CASE("resolve_output_dir precedence") {
  Config c = Config::parse_string("output_dir = cfgdir\n");
  unsetenv("SPDELAB_OUT");
  CHECK(resolve_output_dir(c) == "cfgdir");
  setenv("SPDELAB_OUT", "envdir", 1);
  CHECK(resolve_output_dir(c) == "envdir");
  unsetenv("SPDELAB_OUT");
  CHECK(resolve_output_dir(Config{}) == "out");
}
