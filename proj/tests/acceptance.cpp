// Final gate. Each numbered clause prints exactly one PASS/FAIL line with a
// short detail; the process exits nonzero if any clause fails. Oracles here
// are deliberately independent of the library paths they audit: the
// certificate matrix is reassembled from scratch, linear-map bounds are
// brute-forced over box vertices, and the scalar optimum is checked against
// a closed form frozen before the build.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "riobs/config.hpp"
#include "riobs/observer.hpp"
#include "riobs/rng.hpp"
#include "riobs/simulate.hpp"
#include "riobs/synthesis.hpp"
#include "riobs/util.hpp"

using namespace riobs;

namespace {

bool g_all = true;

void report(int idx, const char* label, bool ok, const std::string& detail) {
  std::printf("criterion %d %-22s %s  (%s)\n", idx, label,
              ok ? "PASS" : "FAIL", detail.c_str());
  if (!ok) g_all = false;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct Bench {
  ScenarioConfig sc;
  TransformedPlant tp;
  MatrixXd L;
  int case_id = 0;
  double eta = 0.0;
};

Bench make_bench() {
  Bench b;
  b.sc = default_scenario();
  b.tp = transform_plant(build_power_plant(b.sc.ps).plant);
  SynthesisResult res = synthesize_first_feasible(b.tp);
  b.L = res.L;
  b.case_id = res.case_id;
  b.eta = res.eta;
  return b;
}

// 1: every state and every one-step-delayed attack sample framed, 50 seeds.
void criterion_containment(const Bench& b) {
  const auto t0 = std::chrono::steady_clock::now();
  ObserverGains gains = make_observer_gains(b.tp, b.L);
  int ok_seeds = 0;
  double min_cx = 1.0, min_cd = 1.0;
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    SimResult sim = simulate_plant(b.tp, b.sc.attack, 3000, seed);
    FramerTrajectory traj = observer_run(b.tp, gains, sim.z1, sim.z2);
    RunMetrics m = evaluate_run(traj, sim, 1e-9);
    min_cx = std::min(min_cx, m.containment_x);
    min_cd = std::min(min_cd, m.containment_d);
    if (m.containment_x == 1.0 && m.containment_d == 1.0 && !m.diverged &&
        m.checked_x == 3001 && m.checked_d == 3000)
      ++ok_seeds;
  }
  const double el = seconds_since(t0);
  report(1, "framer containment",
         ok_seeds == 50 && el < 60.0,
         std::to_string(ok_seeds) + "/50 seeds fully framed, min rates " +
             fmt_sig(min_cx, 6) + "/" + fmt_sig(min_cd, 6) + ", " +
             fmt_sig(el, 3) + "s");
}

// Fresh dense assembly of the certificate matrix, written independently of
// the synthesis module.
MatrixXd assemble_certificate(const ComparisonSystem& cs, const MatrixXd& P,
                              const MatrixXd& G, double eta) {
  const Eigen::Index n = cs.n(), nw = cs.nw();
  MatrixXd M = MatrixXd::Zero(3 * n + nw, 3 * n + nw);
  M.topLeftCorner(n, n) = P;
  M.block(0, n, n, n) = P * cs.A_t - G * cs.C_t;
  M.block(n, 0, n, n) = M.block(0, n, n, n).transpose();
  M.block(0, 2 * n, n, nw) = P * cs.B_t - G * cs.D_t;
  M.block(2 * n, 0, nw, n) = M.block(0, 2 * n, n, nw).transpose();
  M.block(n, n, n, n) = P;
  M.block(n, 2 * n + nw, n, n).setIdentity();
  M.block(2 * n + nw, n, n, n).setIdentity();
  M.block(2 * n, 2 * n, nw, nw) = eta * MatrixXd::Identity(nw, nw);
  M.bottomRightCorner(n, n) = eta * MatrixXd::Identity(n, n);
  return M;
}

void criterion_certificates(const Bench& b) {
  bool ok = true;
  int feasible = 0;
  std::string detail;
  for (int c : {1, 2, 3}) {
    if (!detail.empty()) detail += "; ";
    const ComparisonSystem cs = build_comparison(b.tp, c);
    const auto t0 = std::chrono::steady_clock::now();
    SynthesisResult res;
    try {
      res = synthesize_gain(cs);
    } catch (const InfeasibleError&) {
      detail += "case " + std::to_string(c) + " infeasible";
      continue;
    }
    const double el = seconds_since(t0);
    ++feasible;
    const MatrixXd M = assemble_certificate(cs, res.P, res.Gamma, res.eta);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const double lmi_min = es.eigenvalues()(0);
    double offdiag = 0.0;
    for (Eigen::Index i = 0; i < res.P.rows(); ++i)
      for (Eigen::Index j = 0; j < res.P.cols(); ++j)
        if (i != j) offdiag = std::max(offdiag, res.P(i, j));
    const double gamma_min = res.Gamma.minCoeff();
    const double case_min = (res.P * cs.Mp - res.Gamma * cs.Mg).minCoeff();
    const double pl_res =
        (res.P * res.L - res.Gamma).cwiseAbs().maxCoeff();
    const bool case_ok = lmi_min > 0.0 && offdiag <= 1e-12 &&
                         gamma_min >= -1e-9 && case_min >= -1e-9 &&
                         pl_res <= 1e-8 && el < 10.0;
    ok = ok && case_ok;
    detail += "case " + std::to_string(c) + (case_ok ? " ok" : " BAD") +
              " lmi_min=" + fmt_sig(lmi_min, 3) + " " + fmt_sig(el, 3) + "s";
  }
  report(2, "gain certificates", ok && feasible >= 1, detail);
}

// 3: scalar problem whose optimum is known in closed form. For a scalar
// nonnegative system e+ = a e + b u with a in (0,1) the peak gain is the
// static gain b/(1-a); over the admissible gain range [0, 0.5] the grid
// minimum of 1/(0.5+L) is 1.0, the value frozen as the oracle before the
// solver existed.
void criterion_scalar_optimum() {
  const auto t0 = std::chrono::steady_clock::now();
  ComparisonSystem cs;
  cs.case_id = 3;
  cs.A_t = MatrixXd::Constant(1, 1, 0.5);
  cs.C_t = MatrixXd::Constant(1, 1, 1.0);
  cs.B_t = MatrixXd::Constant(1, 1, 1.0);
  cs.D_t = MatrixXd::Constant(1, 1, 0.0);
  cs.Mp = cs.A_t;
  cs.Mg = cs.C_t;
  double grid = 1e300;
  for (int i = 0; i <= 1000; ++i) {
    const double L = 0.5 * i / 1000.0;
    const double a = 0.5 - L, bb = 1.0;
    grid = std::min(grid, bb / (1.0 - a));
  }
  const double frozen = 1.0;
  SynthesisResult res = synthesize_gain(cs);
  const double el = seconds_since(t0);
  const bool ok = std::abs(res.eta - grid) <= 1e-3 &&
                  std::abs(grid - frozen) <= 1e-12 && el < 1.0;
  report(3, "scalar peak gain", ok,
         "eta=" + fmt_sig(res.eta, 9) + " grid=" + fmt_sig(grid, 9) + " L=" +
             fmt_sig(res.L(0, 0), 6) + " " + fmt_sig(el, 3) + "s");
}

// 4: realized widths never cross above the linear comparison trajectory.
void criterion_domination(const Bench& b) {
  const ComparisonSystem cs = build_comparison(b.tp, b.case_id);
  const VectorXd wt = comparison_disturbance(b.tp);
  ObserverGains gains = make_observer_gains(b.tp, b.L);
  double worst = 1e300;
  for (uint64_t run = 1; run <= 100; ++run) {
    SimResult sim = simulate_plant(b.tp, b.sc.attack, 300, run);
    FramerTrajectory traj = observer_run(b.tp, gains, sim.z1, sim.z2);
    if (traj.diverged || traj.x.empty()) {
      worst = -1e300;
      break;
    }
    VectorXd ebar = traj.x.front().width();
    for (size_t k = 0; k < traj.x.size(); ++k) {
      worst = std::min(worst, (ebar - traj.x[k].width()).minCoeff());
      ebar = comparison_step(cs, b.L, ebar, wt);
    }
  }
  report(4, "comparison domination", worst >= -1e-9,
         "min slack over 100 runs x 300 steps = " + fmt_sig(worst, 3));
}

// 5: the realized width recursion replayed from its closed form, using the
// decomposition gaps the observer actually evaluated.
void criterion_width_recursion(const Bench& b) {
  ObserverGains g = make_observer_gains(b.tp, b.L);
  SimResult sim = simulate_plant(b.tp, b.sc.attack, 1000, 11);
  FramerTrajectory traj = observer_run(b.tp, g, sim.z1, sim.z2);
  const MatrixXd M = g.ALC.abs();
  const MatrixXd LamNV2 = g.LamNV2_s.abs();
  const MatrixXd Lam = g.Lambda_s.abs();
  const VectorXd const_part =
      g.W_hat_s.abs() * b.tp.plant.noise_w.width() +
      (g.V_hat_s.abs() + LamNV2 - M * LamNV2) * b.tp.plant.noise_v.width() +
      (Lam + g.D_s.abs() - M * Lam) * b.tp.eps.width();
  double worst = 0.0;
  size_t steps = 0;
  for (size_t k = 0; k + 1 < traj.x.size() && steps < 1000; ++k, ++steps) {
    const VectorXd pred = M * traj.x[k].width() + traj.delta_rho[k] +
                          g.Ls.abs() * traj.delta_psi2[k] + const_part;
    worst = std::max(worst,
                     (pred - traj.x[k + 1].width()).cwiseAbs().maxCoeff());
  }
  report(5, "width recursion", steps == 1000 && worst <= 1e-9,
         "max replay defect over " + std::to_string(steps) + " steps = " +
             fmt_sig(worst, 3));
}

// 6: remainder decompositions of the plant maps.
void criterion_decomposition(const Bench& b) {
  bool ok = true;
  std::string detail;
  Rng rng(2026, 3);
  const IntervalVector& box = b.tp.plant.box;
  auto sample = [&](const VectorXd& lo, const VectorXd& hi) {
    VectorXd z(lo.size());
    for (Eigen::Index i = 0; i < z.size(); ++i)
      z(i) = rng.uniform(lo(i), hi(i));
    return z;
  };
  for (const JssForm* form : {&b.tp.rho, &b.tp.kappa}) {
    if (form->out_dim() == 0) continue;
    // the chosen slope sits inside the declared derivative bounds, which for
    // the remainder means its own bounds straddle zero
    ok = ok && (form->mu.jac_lo.array() <= 0.0).all() &&
         (form->mu.jac_hi.array() >= 0.0).all();
    double mono = 1e300, tight = 1e300, diag = 0.0, nonneg = 1e300;
    for (int t = 0; t < 1000; ++t) {
      const VectorXd p1 = sample(box.lo, box.hi);
      const VectorXd p2 = sample(box.lo, box.hi);
      const VectorXd p3 = sample(box.lo, box.hi);
      const VectorXd p4 = sample(box.lo, box.hi);
      const VectorXd u1 = p1.cwiseMin(p2), u2 = p1.cwiseMax(p2);
      const VectorXd v2 = p3.cwiseMin(p4), v1 = p3.cwiseMax(p4);
      // nondecreasing in the first slot, nonincreasing in the second
      mono = std::min(mono, (tight_decomp(*form, u2, v2) -
                             tight_decomp(*form, u1, v1))
                                .minCoeff());
      const VectorXd lo = u1, hi = u2;
      const VectorXd gap =
          tight_decomp(*form, hi, lo) - tight_decomp(*form, lo, hi);
      nonneg = std::min(nonneg, gap.minCoeff());
      tight = std::min(tight, (form->F_bar * (hi - lo) - gap).minCoeff());
      const VectorXd z = sample(box.lo, box.hi);
      diag = std::max(diag, (tight_decomp(*form, z, z) - form->mu.eval(z))
                                .cwiseAbs()
                                .maxCoeff());
    }
    ok = ok && mono >= -1e-9 && tight >= -1e-9 && nonneg >= -1e-9 &&
         diag <= 1e-12;
    if (!detail.empty()) detail += "; ";
    detail += "mono=" + fmt_sig(mono, 2) + " tight=" + fmt_sig(tight, 2) +
              " diag=" + fmt_sig(diag, 2);
  }
  report(6, "decomposition", ok, detail);
}

// 7: interval image of a linear map against vertex enumeration.
void criterion_linear_map_oracle() {
  Rng rng(2026, 7);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 8);
    const int m = 1 + static_cast<int>(rng.next_u64() % 6);
    MatrixXd A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-5.0, 5.0);
    VectorXd lo(n), hi(n);
    for (int j = 0; j < n; ++j) {
      const double c = rng.uniform(-10.0, 10.0);
      const double r = rng.uniform(0.0, 5.0);
      lo(j) = c - r;
      hi(j) = c + r;
    }
    const IntervalVector box(lo, hi);
    VectorXd bmin = VectorXd::Constant(m, 1e300);
    VectorXd bmax = VectorXd::Constant(m, -1e300);
    for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
      VectorXd z(n);
      for (int j = 0; j < n; ++j) z(j) = (mask >> j) & 1 ? hi(j) : lo(j);
      const VectorXd img = A * z;
      bmin = bmin.cwiseMin(img);
      bmax = bmax.cwiseMax(img);
    }
    const IntervalVector got = bound_linear_map(A, box);
    worst = std::max(worst, (got.lo - bmin).cwiseAbs().maxCoeff());
    worst = std::max(worst, (got.hi - bmax).cwiseAbs().maxCoeff());
  }
  report(7, "linear map oracle", worst <= 1e-12,
         "max deviation from vertex enumeration = " + fmt_sig(worst, 3));
}

// 8: affine bands hold on dense in-box samples.
void criterion_abstraction(const Bench& b) {
  Rng rng(2026, 13);
  auto band_margin = [&](const DifferentiableMap& g,
                         const AffineAbstraction& abs_, int samples) {
    double margin = 1e300;
    for (int t = 0; t < samples; ++t) {
      VectorXd x(abs_.box.size());
      for (Eigen::Index i = 0; i < x.size(); ++i)
        x(i) = rng.uniform(abs_.box.lo(i), abs_.box.hi(i));
      const VectorXd r = g.eval(x) - abs_.A_g * x;
      margin = std::min(margin, (r - abs_.eps.lo).minCoeff());
      margin = std::min(margin, (abs_.eps.hi - r).minCoeff());
    }
    return margin;
  };

  // benchmark band: with a linear attack-free output map the band collapses
  DifferentiableMap gb;
  gb.eval = [&](const VectorXd& x) {
    return VectorXd(x + b.tp.N * b.tp.psi2.mu.eval(x));
  };
  gb.jac_lo = gb.jac_hi = MatrixXd::Identity(b.tp.n, b.tp.n);
  gb.domain = b.tp.plant.box;
  AffineAbstraction bench;
  bench.A_g = b.tp.A_g;
  bench.eps = b.tp.eps;
  bench.box = b.tp.plant.box;
  const double m_bench = band_margin(gb, bench, 10000);

  // square map on [-1, 2]
  DifferentiableMap sq;
  sq.eval = [](const VectorXd& x) {
    return VectorXd(x.array().square().matrix());
  };
  sq.jac_lo = MatrixXd::Constant(1, 1, -2.0);
  sq.jac_hi = MatrixXd::Constant(1, 1, 4.0);
  sq.domain = IntervalVector(VectorXd::Constant(1, -1.0),
                             VectorXd::Constant(1, 2.0));
  const VectorXd sig_sq = sigma_bound(2.0, sq.domain, 1);
  AffineAbstraction a_sq = affine_outer_approx(sq, sq.domain, sig_sq);
  const double m_sq = band_margin(sq, a_sq, 10000);

  // affine map, band width collapses to numerical noise
  DifferentiableMap af;
  af.eval = [](const VectorXd& x) {
    return VectorXd(3.0 * x - VectorXd::Constant(1, 1.0));
  };
  af.jac_lo = af.jac_hi = MatrixXd::Constant(1, 1, 3.0);
  af.domain = IntervalVector(VectorXd::Constant(1, -2.0),
                             VectorXd::Constant(1, 5.0));
  AffineAbstraction a_af =
      affine_outer_approx(af, af.domain, VectorXd::Zero(1));
  const double m_af = band_margin(af, a_af, 10000);

  const bool ok = m_bench >= -1e-9 && m_sq >= -1e-9 && m_af >= -1e-9 &&
                  a_af.theta <= 1e-9;
  report(8, "affine bands", ok,
         "margins bench=" + fmt_sig(m_bench, 2) + " square=" +
             fmt_sig(m_sq, 2) + " affine=" + fmt_sig(m_af, 2) +
             " affine_theta=" + fmt_sig(a_af.theta, 2));
}

// 9: uncorrected recursion blows up while the synthesized one settles. The
// scenario uses a finite actuator pulse and small noise so the plant returns
// to an equilibrium and the width forcing freezes.
void criterion_stability_contrast(const Bench& b) {
  ScenarioConfig sc = default_scenario();
  sc.ps.noise_w = IntervalVector(VectorXd::Constant(6, -0.2),
                                 VectorXd::Constant(6, 0.2));
  sc.ps.noise_v = IntervalVector(VectorXd::Constant(6, -0.002),
                                 VectorXd::Constant(6, 0.002));
  sc.attack.channels.clear();
  AttackTerm pulse;
  pulse.kind = AttackKind::Step;
  pulse.amplitude = 1.0;
  pulse.onset = 500;
  pulse.length = 400;
  AttackTerm ramp;
  ramp.kind = AttackKind::Ramp;
  ramp.amplitude = 1.0;
  ramp.onset = 500;
  ramp.length = 500;
  sc.attack.channels.push_back({pulse});
  sc.attack.channels.push_back({ramp});
  const TransformedPlant tp = transform_plant(build_power_plant(sc.ps).plant);

  SimResult sim = simulate_plant(tp, sc.attack, 3000, 1);
  ObserverGains tuned = make_observer_gains(tp, b.L);
  FramerTrajectory synth = observer_run(tp, tuned, sim.z1, sim.z2);
  ObserverGains zero =
      make_observer_gains(tp, MatrixXd::Zero(tp.n, tp.m2));
  ObserverOptions unguarded;
  unguarded.guard_enabled = false;
  FramerTrajectory raw = observer_run(tp, zero, sim.z1, sim.z2, unguarded);

  double ratio = 0.0;
  const size_t K = std::min(raw.ex_inf.size(), synth.ex_inf.size());
  for (size_t k = 0; k < K; ++k)
    if (synth.ex_inf[k] > 0.0)
      ratio = std::max(ratio, raw.ex_inf[k] / synth.ex_inf[k]);

  double relvar = 1e300;
  const long W = 300;
  if (!synth.diverged && synth.ex_inf.size() >= static_cast<size_t>(W)) {
    double wmax = 0.0, wmin = 1e300;
    for (size_t k = synth.ex_inf.size() - W; k < synth.ex_inf.size(); ++k) {
      wmax = std::max(wmax, synth.ex_inf[k]);
      wmin = std::min(wmin, synth.ex_inf[k]);
    }
    relvar = wmax > 0.0 ? (wmax - wmin) / wmax : 0.0;
  }
  RunMetrics m = evaluate_run(synth, sim, 1e-9, 1e-3, W);
  const bool ok = ratio >= 1e3 && relvar <= 1e-3 && m.containment_x == 1.0;
  report(9, "stability contrast", ok,
         "width ratio=" + fmt_sig(ratio, 3) + " tail relvar=" +
             fmt_sig(relvar, 3) + " containment=" +
             fmt_sig(m.containment_x, 6));
}

}  // namespace

int main() {
  const Bench b = make_bench();
  std::printf("benchmark gain: case %d, eta=%s\n", b.case_id,
              fmt_sig(b.eta, 12).c_str());
  criterion_containment(b);
  criterion_certificates(b);
  criterion_scalar_optimum();
  criterion_domination(b);
  criterion_width_recursion(b);
  criterion_decomposition(b);
  criterion_linear_map_oracle();
  criterion_abstraction(b);
  criterion_stability_contrast(b);
  std::printf("%s\n", g_all ? "acceptance: all criteria pass"
                            : "acceptance: FAILURES above");
  return g_all ? 0 : 1;
}
