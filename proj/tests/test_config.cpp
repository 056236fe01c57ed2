#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "riobs/config.hpp"
#include "riobs/util.hpp"

using namespace riobs;

TEST_CASE("seed list grammar") {
  CHECK(parse_seed_list("3") == std::vector<uint64_t>{3});
  CHECK(parse_seed_list("1,2,9") == std::vector<uint64_t>{1, 2, 9});
  CHECK(parse_seed_list("1-4") == std::vector<uint64_t>{1, 2, 3, 4});
  CHECK(parse_seed_list("5-5") == std::vector<uint64_t>{5});
  CHECK(parse_seed_list("2, 1, 2-3") == std::vector<uint64_t>{1, 2, 3});
  CHECK_THROWS_AS(parse_seed_list(""), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("4-1"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("a"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("1,,2"), ConfigError);
}

TEST_CASE("defaults") {
  ScenarioConfig sc = default_scenario();
  CHECK(sc.ps.buses() == 3);
  CHECK(sc.ps.n() == 6);
  CHECK(sc.steps == 3000);
  CHECK(sc.seeds.size() == 50);
  CHECK(sc.synth_case == 0);
  CHECK(sc.attack.channels.size() == 2);
  CHECK(sc.ps.noise_w.width().maxCoeff() == 100.0);
  CHECK(sc.ps.noise_v.width().maxCoeff() == 1.0);
}

TEST_CASE("empty object keeps every default") {
  ScenarioConfig sc = parse_config_text("{}");
  ScenarioConfig def = default_scenario();
  CHECK(sc.steps == def.steps);
  CHECK(sc.seeds == def.seeds);
  CHECK(sc.ps.dt == def.ps.dt);
  CHECK(sc.ps.tie.isApprox(def.ps.tie));
}

TEST_CASE("overrides take effect") {
  const std::string text = R"({
    "plant": {"buses": 2, "dt": 0.02},
    "noise": {"w": 10.0, "v": 0.1},
    "attack": [
      {"target": "actuator", "bus": 1,
       "terms": [{"kind": "step", "amplitude": 2.0, "onset": 7, "length": 3}]}
    ],
    "sim": {"steps": 120, "seeds": "2,4"},
    "synthesis": {"case": 1}
  })";
  ScenarioConfig sc = parse_config_text(text);
  CHECK(sc.ps.buses() == 2);
  CHECK(sc.ps.dt == 0.02);
  CHECK(sc.steps == 120);
  CHECK(sc.seeds == std::vector<uint64_t>{2, 4});
  CHECK(sc.synth_case == 1);
  CHECK(sc.attack.channels.size() == 1);
  REQUIRE(sc.attack.channels[0].size() == 1);
  CHECK(sc.attack.channels[0][0].kind == AttackKind::Step);
  CHECK(sc.attack.channels[0][0].onset == 7);
  CHECK(sc.attack.channels[0][0].length == 3);
  CHECK(sc.ps.G.cols() == 1);
  CHECK(sc.ps.H.cols() == 1);
}

TEST_CASE("bad inputs are rejected with reasons") {
  CHECK_THROWS_AS(parse_config_text("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"plant": {"dt": -0.5}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"plant": {"buses": 1}})"),
                  ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"noise": {"w": -3.0}})"),
                       doctest::Contains("inverted"), ConfigError);
  CHECK_THROWS_AS(
      parse_config_text(
          R"({"attack": [{"target": "sensor", "output": 99, "terms": []}]})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config_text(R"({"sim": {"seeds": ""}})"), ConfigError);
  CHECK_THROWS_AS(
      parse_config_text(
          R"({"attack": [{"target": "actuator", "bus": 0,
               "terms": [{"kind": "step", "length": -2}]}]})"),
      ConfigError);
}

TEST_CASE("file loading distinguishes missing from malformed") {
  CHECK_THROWS_AS(load_config("/nonexistent/riobs.json"), UsageError);
  const std::string path = "/tmp/riobs_cfg_test.json";
  {
    std::ofstream f(path);
    f << "{\"sim\": {\"steps\": 10}}";
  }
  ScenarioConfig sc = load_config(path);
  CHECK(sc.steps == 10);
  {
    std::ofstream f(path);
    f << "{broken";
  }
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::remove(path.c_str());
}
