#include "riobs/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "riobs/util.hpp"

namespace riobs {

namespace {

using nlohmann::json;

void check_keys(const json& j, const char* where,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

double get_num(const json& j, const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number())
    throw ConfigError(std::string(key) + " must be a number");
  return j[key].get<double>();
}

long get_int(const json& j, const char* key, long dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number_integer() && !j[key].is_number_unsigned())
    throw ConfigError(std::string(key) + " must be an integer");
  return j[key].get<long>();
}

bool get_bool(const json& j, const char* key, bool dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_boolean())
    throw ConfigError(std::string(key) + " must be a boolean");
  return j[key].get<bool>();
}

VectorXd per_bus(const json& j, const char* key, Eigen::Index size,
                 double dflt) {
  if (!j.contains(key)) return VectorXd::Constant(size, dflt);
  const json& v = j[key];
  if (v.is_number()) return VectorXd::Constant(size, v.get<double>());
  if (v.is_array()) {
    if (static_cast<Eigen::Index>(v.size()) != size)
      throw ConfigError(std::string(key) + " must have one entry per bus");
    VectorXd out(size);
    for (Eigen::Index i = 0; i < size; ++i) {
      if (!v[static_cast<size_t>(i)].is_number())
        throw ConfigError(std::string(key) + " entries must be numbers");
      out(i) = v[static_cast<size_t>(i)].get<double>();
    }
    return out;
  }
  throw ConfigError(std::string(key) + " must be a number or an array");
}

AttackTerm parse_term(const json& t) {
  if (!t.is_object()) throw ConfigError("attack terms must be objects");
  check_keys(t, "attack term",
             {"kind", "amplitude", "onset", "length", "period", "phase"});
  if (!t.contains("kind")) throw ConfigError("attack term needs a kind");
  const std::string k = t["kind"].get<std::string>();
  AttackTerm out;
  if (k == "zero")
    out.kind = AttackKind::Zero;
  else if (k == "step")
    out.kind = AttackKind::Step;
  else if (k == "ramp")
    out.kind = AttackKind::Ramp;
  else if (k == "sine")
    out.kind = AttackKind::Sine;
  else if (k == "random")
    out.kind = AttackKind::Random;
  else
    throw ConfigError("unknown attack kind '" + k + "'");
  out.amplitude = get_num(t, "amplitude", 0.0);
  out.onset = get_int(t, "onset", 0);
  out.length = get_int(t, "length", 0);
  out.period = get_num(t, "period", 100.0);
  out.phase = get_num(t, "phase", 0.0);
  if (out.onset < 0) throw ConfigError("attack onset must be nonnegative");
  if (out.length < 0) throw ConfigError("attack length must be nonnegative");
  if (out.kind == AttackKind::Sine && !(out.period > 0.0))
    throw ConfigError("sine period must be positive");
  if (out.kind == AttackKind::Random && out.amplitude < 0.0)
    throw ConfigError("random attack amplitude must be nonnegative");
  return out;
}

struct ChannelSpec {
  bool actuator = true;
  Eigen::Index idx = 0;
  AttackSignal terms;
};

std::vector<ChannelSpec> default_channels() {
  ChannelSpec d1;
  d1.actuator = true;
  d1.idx = 0;
  d1.terms.push_back({AttackKind::Step, 1.0, 500, 0, 100.0, 0.0});
  d1.terms.push_back({AttackKind::Sine, 0.5, 500, 0, 200.0, 0.0});
  ChannelSpec d2;
  d2.actuator = false;
  d2.idx = 3;
  d2.terms.push_back({AttackKind::Ramp, 1.0, 500, 500, 100.0, 0.0});
  return {d1, d2};
}

ScenarioConfig build_config(const json& j) {
  check_keys(j, "config",
             {"plant", "state_box", "x0_half_width", "noise", "attack", "sim",
              "observer", "synthesis"});
  ScenarioConfig cfg;

  const json plant = j.contains("plant") ? j["plant"] : json::object();
  check_keys(plant, "plant", {"buses", "inertia", "damping", "tie", "dt"});
  const Eigen::Index B = get_int(plant, "buses", 3);
  if (B < 1) throw ConfigError("buses must be at least 1");
  const Eigen::Index n = 2 * B;
  cfg.ps.inertia = per_bus(plant, "inertia", B, 0.01);
  cfg.ps.damping = per_bus(plant, "damping", B, 0.11);
  cfg.ps.dt = get_num(plant, "dt", 0.01);
  if (!(cfg.ps.dt > 0.0)) throw ConfigError("dt must be positive");
  if (plant.contains("tie") && plant["tie"].is_array()) {
    const json& t = plant["tie"];
    if (static_cast<Eigen::Index>(t.size()) != B)
      throw ConfigError("tie must be a buses x buses matrix");
    cfg.ps.tie = MatrixXd::Zero(B, B);
    for (Eigen::Index r = 0; r < B; ++r) {
      const json& row = t[static_cast<size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != B)
        throw ConfigError("tie must be a buses x buses matrix");
      for (Eigen::Index c = 0; c < B; ++c)
        cfg.ps.tie(r, c) = row[static_cast<size_t>(c)].get<double>();
    }
  } else {
    const double coupling =
        plant.contains("tie") ? plant["tie"].get<double>() : 1.0;
    cfg.ps.tie = coupling * (MatrixXd::Ones(B, B) - MatrixXd::Identity(B, B));
  }

  const json box = j.contains("state_box") ? j["state_box"] : json::object();
  check_keys(box, "state_box", {"angle", "freq"});
  const double angle_hw = get_num(box, "angle", 250.0);
  const double freq_hw = get_num(box, "freq", 200.0);
  if (!(angle_hw > 0.0) || !(freq_hw > 0.0))
    throw ConfigError("state_box half widths must be positive");
  VectorXd blo(n), bhi(n);
  for (Eigen::Index i = 0; i < B; ++i) {
    blo(2 * i) = -angle_hw;
    bhi(2 * i) = angle_hw;
    blo(2 * i + 1) = -freq_hw;
    bhi(2 * i + 1) = freq_hw;
  }
  cfg.ps.box = IntervalVector(blo, bhi);

  const double x0_hw = get_num(j, "x0_half_width", 0.5);
  if (x0_hw < 0.0) throw ConfigError("x0_half_width must be nonnegative");
  cfg.ps.x0 = IntervalVector(VectorXd::Constant(n, -x0_hw),
                             VectorXd::Constant(n, x0_hw));

  const json noise = j.contains("noise") ? j["noise"] : json::object();
  check_keys(noise, "noise", {"w", "v"});
  const double w_hw = get_num(noise, "w", 50.0);
  const double v_hw = get_num(noise, "v", 0.5);
  if (w_hw < 0.0 || v_hw < 0.0)
    throw ConfigError("noise bounds are inverted: half widths must be "
                      "nonnegative");
  cfg.ps.noise_w = IntervalVector(VectorXd::Constant(n, -w_hw),
                                  VectorXd::Constant(n, w_hw));
  cfg.ps.noise_v = IntervalVector(VectorXd::Constant(n, -v_hw),
                                  VectorXd::Constant(n, v_hw));

  std::vector<ChannelSpec> specs;
  if (j.contains("attack")) {
    const json& att = j["attack"];
    if (!att.is_array()) throw ConfigError("attack must be an array");
    for (const json& ch : att) {
      check_keys(ch, "attack channel", {"target", "bus", "output", "terms"});
      if (!ch.contains("target")) throw ConfigError("attack channel needs a target");
      const std::string target = ch["target"].get<std::string>();
      ChannelSpec spec;
      if (target == "actuator") {
        spec.actuator = true;
        spec.idx = get_int(ch, "bus", 0);
        if (spec.idx < 0 || spec.idx >= B)
          throw ConfigError("actuator attack bus index out of range");
      } else if (target == "sensor") {
        spec.actuator = false;
        spec.idx = get_int(ch, "output", 0);
        if (spec.idx < 0 || spec.idx >= n)
          throw ConfigError("sensor attack output index out of range");
      } else {
        throw ConfigError("attack target must be 'actuator' or 'sensor'");
      }
      if (ch.contains("terms")) {
        if (!ch["terms"].is_array())
          throw ConfigError("attack terms must be an array");
        for (const json& t : ch["terms"]) spec.terms.push_back(parse_term(t));
      }
      specs.push_back(std::move(spec));
    }
  } else {
    specs = default_channels();
    if (B < 2)
      throw ConfigError(
          "the default attack targets two areas; give an attack section for "
          "smaller systems");
  }
  const Eigen::Index p = static_cast<Eigen::Index>(specs.size());
  cfg.ps.G = MatrixXd::Zero(n, p);
  cfg.ps.H = MatrixXd::Zero(n, p);
  cfg.attack.channels.clear();
  for (Eigen::Index c = 0; c < p; ++c) {
    const ChannelSpec& spec = specs[static_cast<size_t>(c)];
    if (spec.actuator)
      cfg.ps.G(2 * spec.idx + 1, c) = cfg.ps.dt / cfg.ps.inertia(spec.idx);
    else
      cfg.ps.H(spec.idx, c) = 1.0;
    cfg.attack.channels.push_back(spec.terms);
  }

  const json sim = j.contains("sim") ? j["sim"] : json::object();
  check_keys(sim, "sim",
             {"steps", "seeds", "contain_tol", "settle_tol", "settle_window"});
  cfg.steps = get_int(sim, "steps", 3000);
  if (cfg.steps < 1) throw ConfigError("steps must be at least 1");
  if (sim.contains("seeds")) {
    const json& s = sim["seeds"];
    if (s.is_string()) {
      cfg.seeds = parse_seed_list(s.get<std::string>());
    } else if (s.is_array()) {
      for (const json& e : s) {
        if (!e.is_number_integer() && !e.is_number_unsigned())
          throw ConfigError("seeds must be integers");
        const long val = e.get<long>();
        if (val < 0) throw ConfigError("seeds must be nonnegative");
        cfg.seeds.push_back(static_cast<std::uint64_t>(val));
      }
      std::sort(cfg.seeds.begin(), cfg.seeds.end());
      cfg.seeds.erase(std::unique(cfg.seeds.begin(), cfg.seeds.end()),
                      cfg.seeds.end());
    } else {
      throw ConfigError("seeds must be a list or a range string");
    }
  } else {
    cfg.seeds = parse_seed_list("1-50");
  }
  if (cfg.seeds.empty()) throw ConfigError("seed list is empty");
  cfg.contain_tol = get_num(sim, "contain_tol", 1e-9);
  cfg.settle_tol = get_num(sim, "settle_tol", 1e-3);
  cfg.settle_window = get_int(sim, "settle_window", 300);
  if (cfg.settle_window < 1)
    throw ConfigError("settle_window must be positive");

  const json obs = j.contains("observer") ? j["observer"] : json::object();
  check_keys(obs, "observer", {"guard", "guard_margin", "width_cap"});
  cfg.obs.guard_enabled = get_bool(obs, "guard", true);
  cfg.obs.domain_guard_margin = get_num(obs, "guard_margin", 0.1);
  cfg.obs.width_cap = get_num(obs, "width_cap", 1e12);
  if (cfg.obs.domain_guard_margin < 0.0)
    throw ConfigError("guard_margin must be nonnegative");
  if (!(cfg.obs.width_cap > 0.0))
    throw ConfigError("width_cap must be positive");

  const json syn = j.contains("synthesis") ? j["synthesis"] : json::object();
  check_keys(syn, "synthesis",
             {"case", "mu_s", "metzler_cap", "case_slack", "eta_cap", "p_cap",
              "gap_tol"});
  cfg.synth_case = static_cast<int>(get_int(syn, "case", 0));
  if (cfg.synth_case < 0 || cfg.synth_case > 3)
    throw ConfigError("synthesis case must be 0, 1, 2 or 3");
  cfg.synth.mu_s = get_num(syn, "mu_s", cfg.synth.mu_s);
  cfg.synth.metzler_cap = get_num(syn, "metzler_cap", cfg.synth.metzler_cap);
  cfg.synth.case_slack = get_num(syn, "case_slack", cfg.synth.case_slack);
  cfg.synth.eta_cap = get_num(syn, "eta_cap", cfg.synth.eta_cap);
  cfg.synth.p_cap = get_num(syn, "p_cap", cfg.synth.p_cap);
  cfg.synth.cone.gap_tol = get_num(syn, "gap_tol", cfg.synth.cone.gap_tol);
  return cfg;
}

}  // namespace

ScenarioConfig default_scenario() { return parse_config_text("{}"); }

std::vector<std::uint64_t> parse_seed_list(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  std::string token;
  std::stringstream ss(spec);
  while (std::getline(ss, token, ',')) {
    token.erase(std::remove_if(token.begin(), token.end(),
                               [](unsigned char c) { return std::isspace(c); }),
                token.end());
    if (token.empty()) throw ConfigError("empty entry in seed list");
    const size_t dash = token.find('-');
    auto parse_one = [](const std::string& s) -> std::uint64_t {
      if (s.empty() ||
          !std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isdigit(c); }))
        throw ConfigError("seed list entries must be nonnegative integers");
      return std::stoull(s);
    };
    if (dash == std::string::npos) {
      seeds.push_back(parse_one(token));
    } else {
      const std::uint64_t a = parse_one(token.substr(0, dash));
      const std::uint64_t b = parse_one(token.substr(dash + 1));
      if (b < a) throw ConfigError("seed range is inverted");
      if (b - a > 100000) throw ConfigError("seed range is too large");
      for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    }
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return seeds;
}

ScenarioConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  try {
    return build_config(j);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace riobs
