#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riobs/observer.hpp"
#include "riobs/power_system.hpp"
#include "riobs/synthesis.hpp"

namespace riobs {

// A fully resolved scenario: the benchmark plant, the attack signals, and
// every tolerance the tools need. Fields missing from a config file keep
// the built-in defaults.
struct ScenarioConfig {
  PowerSystemConfig ps;
  AttackScenario attack;
  long steps = 3000;
  std::vector<std::uint64_t> seeds;
  int synth_case = 0;  // 0 means try cases 3, 1, 2 in order
  SynthesisOptions synth;
  ObserverOptions obs;
  double contain_tol = 1e-9;
  double settle_tol = 1e-3;
  long settle_window = 300;
};

// Three coupled areas, one actuator attack on the first area and one sensor
// attack on the second area's frequency measurement.
ScenarioConfig default_scenario();

// "3", "1,2,9" and "1-50" style lists, merged and deduplicated.
std::vector<std::uint64_t> parse_seed_list(const std::string& spec);

ScenarioConfig parse_config_text(const std::string& text);

// Throws UsageError when the file cannot be read and ConfigError when it
// cannot be parsed or fails validation.
ScenarioConfig load_config(const std::string& path);

}  // namespace riobs
