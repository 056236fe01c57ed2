// Command line front end: gain synthesis, batch simulation, self checks.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riobs/config.hpp"
#include "riobs/simulate.hpp"
#include "riobs/util.hpp"

namespace {

using namespace riobs;

void print_warnings(const BuiltPlant& bp) {
  for (const std::string& w : bp.warnings)
    std::cerr << "warning: " << w << "\n";
}

TransformedPlant prepare(const ScenarioConfig& sc) {
  BuiltPlant bp = build_power_plant(sc.ps);
  print_warnings(bp);
  return transform_plant(bp.plant);
}

int cmd_synthesize(const std::string& config_path, int case_id,
                   const std::string& out_dir) {
  ScenarioConfig sc = load_config(config_path);
  TransformedPlant tp = prepare(sc);
  int wanted = case_id > 0 ? case_id : sc.synth_case;
  SynthesisResult res =
      wanted > 0 ? synthesize_gain(build_comparison(tp, wanted), sc.synth)
                 : synthesize_first_feasible(tp, sc.synth);
  ComparisonSystem cs = build_comparison(tp, res.case_id);
  VerificationReport rep = verify_synthesis(res, cs);

  std::filesystem::create_directories(out_dir);
  const std::string report_path = out_dir + "/gains.txt";
  const std::string gain_path = out_dir + "/gains.dat";
  {
    std::string report = gain_report(res, rep);
    FILE* f = std::fopen(report_path.c_str(), "wb");
    if (!f) throw ConfigError("cannot open output file: " + report_path);
    std::fwrite(report.data(), 1, report.size(), f);
    std::fclose(f);
  }
  write_gain_file(gain_path, res.case_id, res.eta, res.L);

  std::cout << "case " << res.case_id
            << " certified: eta = " << fmt_sig(res.eta, 12) << "\n";
  std::cout << "wrote " << report_path << "\n";
  std::cout << "wrote " << gain_path << "\n";
  if (!rep.pass)
    throw SolverError(
        "independent certificate verification failed; residuals are in " +
        report_path);
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& gains_path,
                 const std::string& gain_literal, const std::string& seeds_str,
                 long steps, const std::string& out_dir) {
  ScenarioConfig sc = load_config(config_path);
  TransformedPlant tp = prepare(sc);

  if (gains_path.empty() == gain_literal.empty())
    throw UsageError("pass exactly one of --gains <file> or --gain zero");

  Eigen::MatrixXd L;
  BatchOptions opt;
  opt.observer = sc.obs;
  if (!gain_literal.empty()) {
    if (gain_literal != "zero")
      throw UsageError("--gain accepts only the literal 'zero'");
    L = Eigen::MatrixXd::Zero(tp.n, tp.m2);
    // An uncorrected framer can blow up; let the width cap flag that as a
    // divergent run instead of tripping the domain guard.
    opt.observer.guard_enabled = false;
  } else {
    GainFile g = read_gain_file(gains_path);
    if (g.L.rows() != tp.n || g.L.cols() != tp.m2)
      throw ConfigError(
          "gain matrix is " + std::to_string(g.L.rows()) + " x " +
          std::to_string(g.L.cols()) + " but this scenario needs " +
          std::to_string(tp.n) + " x " + std::to_string(tp.m2));
    L = g.L;
  }

  opt.steps = steps > 0 ? steps : sc.steps;
  opt.seeds = seeds_str.empty() ? sc.seeds : parse_seed_list(seeds_str);
  opt.contain_tol = sc.contain_tol;
  opt.settle_tol = sc.settle_tol;
  opt.settle_window = static_cast<int>(sc.settle_window);
  opt.out_dir = out_dir;

  BatchResult br = run_batch(tp, L, sc.attack, opt);

  std::size_t contained = 0, diverged = 0;
  for (const SeedRun& r : br.runs) {
    const RunMetrics& m = r.metrics;
    int settled = m.diverged ? -1 : (m.settled ? 1 : 0);
    std::cout << "seed " << r.seed << ": containment_x="
              << fmt_sig(m.containment_x, 6)
              << " containment_d=" << fmt_sig(m.containment_d, 6)
              << " width_x_final=" << fmt_sig(m.width_x_final, 6)
              << " width_d_final=" << fmt_sig(m.width_d_final, 6)
              << " settled=" << settled << "\n";
    if (m.containment_x == 1.0 && m.containment_d == 1.0) ++contained;
    if (m.diverged) ++diverged;
  }
  std::cout << contained << "/" << br.runs.size()
            << " runs fully contained\n";
  if (diverged)
    std::cout << diverged << " runs flagged divergent (settled=-1)\n";
  std::cout << "wrote " << out_dir << "/metrics.csv\n";
  return 0;
}

bool suite_interval() {
  Rng rng(2024, 7);
  for (int t = 0; t < 20; ++t) {
    Eigen::Index m = 1 + t % 5, n = 1 + (t * 7) % 6;
    Eigen::MatrixXd M(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) M(i, j) = rng.uniform(-3, 3);
    IntervalVector box;
    box.lo.resize(n);
    box.hi.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double c = rng.uniform(-2, 2), r = rng.uniform(0, 1.5);
      box.lo(j) = c - r;
      box.hi(j) = c + r;
    }
    IntervalVector img = bound_linear_map(M, box);
    for (int s = 0; s < 25; ++s) {
      VectorXd x(n);
      for (Eigen::Index j = 0; j < n; ++j)
        x(j) = rng.uniform(box.lo(j), box.hi(j));
      if (!img.contains(M * x, 1e-9)) return false;
    }
  }
  return true;
}

IntervalVector random_subbox(const IntervalVector& box, Rng& rng) {
  IntervalVector sub;
  const Eigen::Index n = box.size();
  sub.lo.resize(n);
  sub.hi.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double a = rng.uniform(box.lo(j), box.hi(j));
    double b = rng.uniform(box.lo(j), box.hi(j));
    sub.lo(j) = std::min(a, b);
    sub.hi(j) = std::max(a, b);
  }
  return sub;
}

bool check_form_on_box(const JssForm& form, const IntervalVector& sub,
                       Rng& rng, double tol) {
  const Eigen::Index n = form.in_dim();
  VectorXd mu_lo = tight_decomp(form, sub.lo, sub.hi);
  VectorXd mu_hi = tight_decomp(form, sub.hi, sub.lo);
  IntervalVector full = embed_step(form, sub);
  for (int s = 0; s < 15; ++s) {
    VectorXd x(n);
    for (Eigen::Index j = 0; j < n; ++j)
      x(j) = rng.uniform(sub.lo(j), sub.hi(j));
    VectorXd mu = form.mu.eval(x);
    if (((mu - mu_lo).array() < -tol).any()) return false;
    if (((mu_hi - mu).array() < -tol).any()) return false;
    if (!full.contains(form.H * x + mu, tol)) return false;
  }
  return true;
}

bool suite_decomposition(const TransformedPlant& tp) {
  Rng rng(2024, 11);
  for (int t = 0; t < 12; ++t) {
    IntervalVector sub = random_subbox(tp.plant.box, rng);
    if (!check_form_on_box(tp.rho, sub, rng, 1e-7)) return false;
    if (!tp.psi2_zero && !check_form_on_box(tp.psi2, sub, rng, 1e-7))
      return false;
    if (tp.ad.p_H > 0 && !check_form_on_box(tp.kappa, sub, rng, 1e-7))
      return false;
  }
  return true;
}

bool suite_abstraction(const TransformedPlant& tp) {
  Rng rng(2024, 13);
  const Eigen::Index n = tp.n;
  for (int s = 0; s < 200; ++s) {
    VectorXd x(n);
    for (Eigen::Index j = 0; j < n; ++j)
      x(j) = rng.uniform(tp.plant.box.lo(j), tp.plant.box.hi(j));
    VectorXd g = x + tp.N * tp.psi2.mu.eval(x);
    VectorXd band = g - tp.A_g * x;
    if (((band - tp.eps.lo).array() < -1e-8).any()) return false;
    if (((tp.eps.hi - band).array() < -1e-8).any()) return false;
  }
  return true;
}

bool suite_domination(const TransformedPlant& tp, const ScenarioConfig& sc,
                      const GainFile& g, std::string& detail) {
  if (g.L.rows() != tp.n || g.L.cols() != tp.m2) {
    detail = "gain matrix shape mismatch";
    return false;
  }
  if ((g.L.array() < -1e-9).any()) {
    detail = "gain has negative entries";
    return false;
  }
  ComparisonSystem cs = build_comparison(tp, g.case_id);
  Eigen::MatrixXd case_rows = cs.Mp - g.L * cs.Mg;
  if ((case_rows.array() < -1e-9).any()) {
    detail = "elementwise case condition violated";
    return false;
  }
  Eigen::MatrixXd closed = cs.A_t - g.L * cs.C_t;
  if ((closed.array() < -1e-9).any()) {
    detail = "comparison transition matrix has negative entries";
    return false;
  }

  ObserverGains gains = make_observer_gains(tp, g.L);
  VectorXd wt = comparison_disturbance(tp);
  BatchOptions opt;
  opt.steps = std::min<long>(sc.steps, 800);
  opt.observer = sc.obs;
  opt.contain_tol = sc.contain_tol;
  std::vector<std::uint64_t> seeds(sc.seeds.begin(),
                                   sc.seeds.begin() +
                                       std::min<std::size_t>(3, sc.seeds.size()));
  if (seeds.empty()) seeds.push_back(1);
  for (std::uint64_t seed : seeds) {
    FramerTrajectory traj;
    SimResult sim;
    run_single(tp, gains, sc.attack, seed, opt, &traj, &sim);
    if (traj.diverged) {
      detail = "framer widths diverged under this gain";
      return false;
    }
    VectorXd e_bar = traj.x.front().width();
    for (std::size_t k = 1; k < traj.x.size(); ++k) {
      e_bar = comparison_step(cs, g.L, e_bar, wt);
      VectorXd e = traj.x[k].width();
      double slack = 1e-6 * (1.0 + e_bar.lpNorm<Eigen::Infinity>());
      if (((e_bar - e).array() < -slack).any()) {
        detail = "realized width exceeded the comparison bound at index " +
                 std::to_string(k) + " (seed " + std::to_string(seed) + ")";
        return false;
      }
    }
  }
  return true;
}

int cmd_validate(const std::string& config_path,
                 const std::string& gains_path) {
  ScenarioConfig sc = load_config(config_path);
  TransformedPlant tp = prepare(sc);
  bool ok = true;

  auto report = [&ok](const char* name, bool pass, const std::string& detail) {
    std::cout << "suite " << name << ": " << (pass ? "pass" : "FAIL");
    if (!pass && !detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    ok = ok && pass;
  };

  report("interval-arithmetic", suite_interval(), "");
  report("remainder-decomposition", suite_decomposition(tp), "");
  report("state-map-abstraction", suite_abstraction(tp), "");
  if (!gains_path.empty()) {
    GainFile g = read_gain_file(gains_path);
    std::string detail;
    bool pass = suite_domination(tp, sc, g, detail);
    report("gain-domination", pass, detail);
  }
  std::cout << (ok ? "validate: ok" : "validate: failed") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "riobs: resilient interval observers for nonlinear systems under "
      "sensor and actuator data injection"};
  app.require_subcommand(1);

  std::string syn_config, syn_out = ".";
  int syn_case = 0;
  CLI::App* syn =
      app.add_subcommand("synthesize", "compute a certified observer gain");
  syn->add_option("--config", syn_config, "scenario config file")->required();
  syn->add_option("--case", syn_case, "comparison case (1, 2 or 3)")
      ->check(CLI::Range(1, 3));
  syn->add_option("--out", syn_out, "output directory");

  std::string sim_config, sim_gains, sim_gain_literal, sim_seeds,
      sim_out = ".";
  long sim_steps = 0;
  CLI::App* sim = app.add_subcommand(
      "simulate", "run the framer over simulated attacked trajectories");
  sim->add_option("--config", sim_config, "scenario config file")->required();
  sim->add_option("--gains", sim_gains, "gain file from synthesize");
  sim->add_option("--gain", sim_gain_literal,
                  "literal gain override; only 'zero' is understood");
  sim->add_option("--seeds", sim_seeds, "seed list, e.g. 1-50 or 3,7,9");
  sim->add_option("--steps", sim_steps, "horizon override");
  sim->add_option("--out", sim_out, "output directory");

  std::string val_config, val_gains;
  CLI::App* val = app.add_subcommand(
      "validate", "run built-in containment self checks");
  val->add_option("--config", val_config, "scenario config file")->required();
  val->add_option("--gains", val_gains,
                  "also check this gain against the comparison bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 64;
  }

  try {
    if (*syn) return cmd_synthesize(syn_config, syn_case, syn_out);
    if (*sim)
      return cmd_simulate(sim_config, sim_gains, sim_gain_literal, sim_seeds,
                          sim_steps, sim_out);
    if (*val) return cmd_validate(val_config, val_gains);
  } catch (const riobs::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 64;
  } catch (const riobs::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 65;
  } catch (const riobs::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
