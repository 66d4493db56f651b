#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gfx/runner.hpp"

using namespace gfx::runner;
namespace fs = std::filesystem;

namespace {

Json config_a(const std::string& experiment) {
  return {{"experiment", experiment},
          {"characteristics", {{"lambda1", {{"type", "atoms"}, {"atoms", {{-0.6931471805599453, 1.0}}}}}}}};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gfx_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("normalize fills defaults and rejects unknown keys") {
  const Json cfg = normalize(config_a("cumulant"));
  CHECK(cfg["simulation"]["step"] == 1e-3);
  CHECK(cfg["characteristics"]["lambda2"]["type"] == "zero");
  CHECK(cfg["statistics"]["seed"] == 1);
  CHECK(normalize(cfg) == cfg);  // the echo round-trips through the validator

  Json bad = config_a("cumulant");
  bad["simulation"]["stepp"] = 0.1;
  CHECK_THROWS_AS(normalize(bad), ConfigError);
  Json range = config_a("cumulant");
  range["simulation"]["x0"] = -1;
  CHECK_THROWS_AS(normalize(range), ConfigError);
  Json gate = config_a("cumulant");
  gate["characteristics"]["b"] = 5.0;
  CHECK_THROWS_AS(normalize(gate), ConfigError);
  Json no_exp = config_a("cumulant");
  no_exp.erase("experiment");
  CHECK_THROWS_AS(normalize(no_exp), ConfigError);
  Json measure = config_a("cumulant");
  measure["characteristics"]["lambda1"] = {{"type", "power"}, {"c", 1}, {"beta", 0.5}};
  CHECK_THROWS_AS(normalize(measure), ConfigError);
}

TEST_CASE("execution settings stay out of the echo") {
  Json doc = config_a("cumulant");
  doc["execution"] = {{"threads", 3}, {"out_dir", "x"}};
  Execution exec;
  const Json cfg = normalize(doc, &exec);
  CHECK(exec.threads == 3);
  CHECK(exec.out_dir == "x");
  CHECK_FALSE(cfg.contains("execution"));
}

TEST_CASE("dotted overrides") {
  Json doc = config_a("simulate");
  apply_override(doc, "simulation.caps.max_particles=50");
  apply_override(doc, "statistics.t=[0.5,1]");
  apply_override(doc, "explode.mode=direct");
  CHECK(doc["simulation"]["caps"]["max_particles"] == 50);
  CHECK(doc["statistics"]["t"].size() == 2);
  CHECK(doc["explode"]["mode"] == "direct");
  CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "explode.mode.x=1"), ConfigError);
}

TEST_CASE("CSV formatting") {
  Table t{"x", {"a", "b"}, {}};
  CHECK(to_csv(t) == "a,b\r\n");  // empty result: header only
  t.rows.push_back({"1,5", "say \"hi\""});
  CHECK(to_csv(t) == "a,b\r\n\"1,5\",\"say \"\"hi\"\"\"\r\n");
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(1.0 / 0.0) == "inf");
}

TEST_CASE("cumulant experiment reports kappa(2) = 0.5") {
  Json cfg = normalize(config_a("cumulant"));
  Execution exec;
  const Report rep = run(cfg, exec);
  REQUIRE(rep.tables.size() >= 1);
  const auto& tab = rep.tables[0];
  CHECK(tab.columns == std::vector<std::string>{"q", "kappa", "kappa_dot", "finite_flag"});
  bool found = false;
  for (const auto& row : tab.rows) {
    if (row[0] == "2") {
      found = true;
      CHECK(std::stod(row[1]) == doctest::Approx(0.5).epsilon(1e-14));
    }
  }
  CHECK(found);
  CHECK(rep.exit_code(true) == 0);
}

TEST_CASE("snapshot table schema and thread independence") {
  Json doc = config_a("simulate");
  doc["statistics"] = {{"replicas", 20}, {"t", {0.5, 1.0}}, {"seed", 5}};
  const auto d1 = scratch("snap1"), d2 = scratch("snap2");
  Execution e1{1, d1.string()}, e2{4, d2.string()};
  const Json cfg = normalize(doc);
  emit(run(cfg, e1), e1, false);
  emit(run(cfg, e2), e2, false);
  const auto csv = slurp(d1 / "snapshot.csv");
  CHECK(csv.rfind("replica_id,t,label,mass\r\n", 0) == 0);
  CHECK(csv == slurp(d2 / "snapshot.csv"));
  CHECK(slurp(d1 / "summary.json") == slurp(d2 / "summary.json"));
  CHECK(slurp(d1 / "timing.json") != slurp(d2 / "timing.json"));
  const Json summary = Json::parse(slurp(d1 / "summary.json"));
  CHECK(normalize(summary["config"]) == summary["config"]);
  CHECK(!fs::exists(d1 / "snapshot.csv.tmp"));
}

TEST_CASE("execute: exit codes") {
  const auto dir = scratch("exec");
  const auto write = [&](const std::string& name, const Json& j) {
    std::ofstream(dir / name) << j.dump();
    return (dir / name).string();
  };
  Invocation inv;
  inv.experiment = "cumulant";
  inv.config_path = write("a.json", config_a("cumulant"));
  inv.out_dir = (dir / "out").string();
  CHECK(execute(inv) == 0);
  CHECK(fs::exists(dir / "out" / "cumulant.csv"));

  Json bad = config_a("cumulant");
  bad["oops"] = 1;
  inv.config_path = write("bad.json", bad);
  inv.out_dir = (dir / "out_bad").string();
  CHECK(execute(inv) == 2);
  CHECK_FALSE(fs::exists(dir / "out_bad" / "summary.json"));

  // capped runs above tolerance
  Json capped = config_a("martingale-check");
  capped["simulation"] = {{"caps", {{"max_particles", 2}}}};
  capped["statistics"] = {{"replicas", 50}, {"t", {3.0}}};
  inv.experiment = "martingale-check";
  inv.config_path = write("capped.json", capped);
  inv.out_dir = (dir / "out_capped").string();
  CHECK(execute(inv) == 3);

  // an impossible assertion: n_sigma tiny
  Json strict = config_a("spine");
  strict["statistics"] = {{"replicas", 200}, {"q", {1.0}}, {"t", {1.0}}, {"n_sigma", 1e-9}};
  inv.experiment = "spine";
  inv.config_path = write("strict.json", strict);
  inv.out_dir = (dir / "out_strict").string();
  inv.assert_mode = true;
  CHECK(execute(inv) == 1);
  inv.assert_mode = false;
  CHECK(execute(inv) == 0);

  inv.experiment = "simulate";
  CHECK(execute(inv) == 2);  // config names a different experiment
}
