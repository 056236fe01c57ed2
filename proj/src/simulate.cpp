#include "riobs/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "riobs/util.hpp"

namespace riobs {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string csv_path(const std::string& dir, std::uint64_t seed) {
  return dir + "/run_seed_" + std::to_string(seed) + ".csv";
}

bool contains_point(const IntervalVector& box, const VectorXd& pt,
                    double tol) {
  return (pt.array() >= box.lo.array() - tol).all() &&
         (pt.array() <= box.hi.array() + tol).all();
}

}  // namespace

int resolve_thread_cap(int requested, std::size_t jobs) {
  long cap = requested;
  if (cap <= 0) {
    if (const char* env = std::getenv("RIOBS_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && v > 0) cap = v;
    }
  }
  if (cap <= 0) cap = static_cast<long>(std::thread::hardware_concurrency());
  if (cap <= 0) cap = 1;
  if (jobs > 0 && cap > static_cast<long>(jobs)) cap = static_cast<long>(jobs);
  return static_cast<int>(cap);
}

RunMetrics run_single(const TransformedPlant& tp, const ObserverGains& gains,
                      const AttackScenario& sc, std::uint64_t seed,
                      const BatchOptions& opt, FramerTrajectory* traj_out,
                      SimResult* sim_out) {
  SimResult sim = simulate_plant(tp, sc, opt.steps, seed, opt.sim);
  FramerTrajectory traj =
      observer_run(tp, gains, sim.z1, sim.z2, opt.observer);
  RunMetrics m = evaluate_run(traj, sim, opt.contain_tol, opt.settle_tol,
                              opt.settle_window);
  if (traj_out) *traj_out = std::move(traj);
  if (sim_out) *sim_out = std::move(sim);
  return m;
}

BatchResult run_batch(const TransformedPlant& tp, const Eigen::MatrixXd& L,
                      const AttackScenario& sc, const BatchOptions& opt) {
  std::vector<std::uint64_t> seeds = opt.seeds;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  if (seeds.empty()) throw ConfigError("no seeds given for the batch run");

  ObserverGains gains = make_observer_gains(tp, L);
  if (!opt.out_dir.empty())
    std::filesystem::create_directories(opt.out_dir);

  std::vector<RunMetrics> metrics(seeds.size());
  std::vector<std::exception_ptr> failures(seeds.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      try {
        FramerTrajectory traj;
        SimResult sim;
        metrics[i] =
            run_single(tp, gains, sc, seeds[i], opt, &traj, &sim);
        if (!opt.out_dir.empty())
          write_run_csv(csv_path(opt.out_dir, seeds[i]), traj, sim,
                        opt.contain_tol);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  int nthreads = resolve_thread_cap(opt.threads, seeds.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < seeds.size(); ++i)
    if (failures[i]) std::rethrow_exception(failures[i]);

  BatchResult out;
  out.runs.resize(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i)
    out.runs[i] = SeedRun{seeds[i], metrics[i]};

  if (!opt.out_dir.empty()) {
    write_metrics_csv(opt.out_dir + "/metrics.csv", out.runs);
    if (opt.write_plot_script)
      write_plot_script(opt.out_dir + "/plot_runs.py");
  }
  return out;
}

void write_run_csv(const std::string& path, const FramerTrajectory& traj,
                   const SimResult& sim, double contain_tol) {
  const Eigen::Index n = traj.x.empty() ? 0 : traj.x.front().size();
  const Eigen::Index p = traj.d.empty()
                             ? (sim.d.empty() ? 0 : sim.d.front().size())
                             : traj.d.front().size();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open output file: " + path);

  std::string line = "k";
  for (Eigen::Index i = 1; i <= n; ++i) line += ",x_lo_" + std::to_string(i);
  for (Eigen::Index i = 1; i <= n; ++i) line += ",x_hi_" + std::to_string(i);
  for (Eigen::Index i = 1; i <= p; ++i) line += ",d_lo_" + std::to_string(i);
  for (Eigen::Index i = 1; i <= p; ++i) line += ",d_hi_" + std::to_string(i);
  line += ",ex_width_inf,ed_width_inf,contained_x,contained_d\n";
  os << line;

  for (std::size_t k = 0; k < traj.x.size(); ++k) {
    line = std::to_string(k);
    const IntervalVector& xk = traj.x[k];
    for (Eigen::Index i = 0; i < n; ++i)
      line += "," + fmt_sig(xk.lo(i), 12);
    for (Eigen::Index i = 0; i < n; ++i)
      line += "," + fmt_sig(xk.hi(i), 12);
    const bool have_d = k >= 1 && k - 1 < traj.d.size();
    if (have_d) {
      const IntervalVector& dk = traj.d[k - 1];
      for (Eigen::Index i = 0; i < p; ++i)
        line += "," + fmt_sig(dk.lo(i), 12);
      for (Eigen::Index i = 0; i < p; ++i)
        line += "," + fmt_sig(dk.hi(i), 12);
    } else {
      for (Eigen::Index i = 0; i < 2 * p; ++i) line += "," + fmt_sig(kNan, 12);
    }
    line += "," + fmt_sig(traj.ex_inf[k], 12);
    line += "," + (have_d ? fmt_sig(traj.ed_inf[k - 1], 12)
                          : fmt_sig(kNan, 12));
    int cx = k < sim.x.size() && contains_point(xk, sim.x[k], contain_tol)
                 ? 1
                 : 0;
    line += "," + std::to_string(cx);
    if (have_d && k - 1 < sim.d.size()) {
      int cd = contains_point(traj.d[k - 1], sim.d[k - 1], contain_tol)
                   ? 1
                   : 0;
      line += "," + std::to_string(cd);
    } else {
      line += "," + fmt_sig(kNan, 12);
    }
    line += "\n";
    os << line;
  }
}

void write_metrics_csv(const std::string& path,
                       const std::vector<SeedRun>& runs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open output file: " + path);
  os << "seed,containment_x,containment_d,width_x_final,width_d_final,"
        "settled\n";
  for (const SeedRun& r : runs) {
    const RunMetrics& m = r.metrics;
    int settled = m.diverged ? -1 : (m.settled ? 1 : 0);
    os << std::to_string(r.seed) << "," << fmt_sig(m.containment_x, 12)
       << "," << fmt_sig(m.containment_d, 12) << ","
       << fmt_sig(m.width_x_final, 12) << "," << fmt_sig(m.width_d_final, 12)
       << "," << settled << "\n";
  }
}

void write_plot_script(const std::string& path) {
  static const char* kScript = R"PY(#!/usr/bin/env python3
"""Chart the run_seed_*.csv traces sitting next to this script."""
import csv
import glob
import math
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    cols = {}
    if not rows:
        return cols, 0, 0
    for key in rows[0]:
        cols[key] = [float(r[key]) if r[key] not in ("", "nan") else math.nan
                     for r in rows]
    n = sum(1 for key in rows[0] if key.startswith("x_lo_"))
    p = sum(1 for key in rows[0] if key.startswith("d_lo_"))
    return cols, n, p


def main():
    here = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(
        os.path.abspath(__file__))
    for path in sorted(glob.glob(os.path.join(here, "run_seed_*.csv"))):
        cols, n, p = load(path)
        if not cols:
            continue
        k = cols["k"]
        fig, axes = plt.subplots(3, 1, figsize=(9, 11), sharex=True)
        for i in range(1, n + 1):
            lo, hi = cols[f"x_lo_{i}"], cols[f"x_hi_{i}"]
            axes[0].fill_between(k, lo, hi, alpha=0.25)
            axes[0].plot(k, lo, lw=0.6, label=f"x{i}")
            axes[0].plot(k, hi, lw=0.6)
        axes[0].set_ylabel("state corners")
        axes[0].legend(loc="upper left", fontsize=7, ncol=3)
        for i in range(1, p + 1):
            lo, hi = cols[f"d_lo_{i}"], cols[f"d_hi_{i}"]
            axes[1].fill_between(k, lo, hi, alpha=0.25)
            axes[1].plot(k, lo, lw=0.6, label=f"d{i}")
            axes[1].plot(k, hi, lw=0.6)
        axes[1].set_ylabel("input corners")
        axes[1].legend(loc="upper left", fontsize=7)
        axes[2].plot(k, cols["ex_width_inf"], label="state width")
        if p:
            axes[2].plot(k, cols["ed_width_inf"], label="input width")
        axes[2].set_yscale("log")
        axes[2].set_ylabel("sup-norm width")
        axes[2].set_xlabel("k")
        axes[2].legend(loc="upper right", fontsize=8)
        out = path[:-4] + ".png"
        fig.tight_layout()
        fig.savefig(out, dpi=120)
        plt.close(fig)
        print(out)


if __name__ == "__main__":
    main()
)PY";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open output file: " + path);
  os << kScript;
}

void write_gain_file(const std::string& path, int case_id, double eta,
                     const Eigen::MatrixXd& L) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open output file: " + path);
  os << "riobs-gains 1\n";
  os << "case " << case_id << "\n";
  os << "eta " << fmt_sig(eta, 17) << "\n";
  os << "rows " << L.rows() << "\n";
  os << "cols " << L.cols() << "\n";
  for (Eigen::Index r = 0; r < L.rows(); ++r) {
    std::string line;
    for (Eigen::Index c = 0; c < L.cols(); ++c) {
      if (c) line += " ";
      line += fmt_sig(L(r, c), 17);
    }
    os << line << "\n";
  }
}

GainFile read_gain_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read gain file: " + path);
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (!is || magic != "riobs-gains" || version != 1)
    throw ConfigError("unrecognized gain file header in " + path);
  GainFile g;
  std::string key;
  Eigen::Index rows = 0, cols = 0;
  is >> key >> g.case_id;
  if (!is || key != "case") throw ConfigError("gain file missing case line");
  is >> key >> g.eta;
  if (!is || key != "eta") throw ConfigError("gain file missing eta line");
  is >> key >> rows;
  if (!is || key != "rows" || rows < 0)
    throw ConfigError("gain file missing rows line");
  is >> key >> cols;
  if (!is || key != "cols" || cols < 0)
    throw ConfigError("gain file missing cols line");
  g.L.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v;
      is >> v;
      if (!is) throw ConfigError("gain file truncated: " + path);
      g.L(r, c) = v;
    }
  return g;
}

std::string gain_report(const SynthesisResult& res,
                        const VerificationReport& rep) {
  std::ostringstream os;
  os << "interval observer gain synthesis\n";
  os << "case: " << res.case_id << "\n";
  os << "eta (peak gain bound): " << fmt_sig(res.eta, 12) << "\n";
  os << "solver iterations: " << res.sol.iters << "\n";
  os << "certificate residuals:\n";
  os << "  lmi_min_eig:   " << fmt_sig(rep.lmi_min_eig, 12) << "\n";
  os << "  p_offdiag_max: " << fmt_sig(rep.p_offdiag_max, 12) << "\n";
  os << "  gamma_min:     " << fmt_sig(rep.gamma_min, 12) << "\n";
  os << "  case_min:      " << fmt_sig(rep.case_min, 12) << "\n";
  os << "  pl_residual:   " << fmt_sig(rep.pl_residual, 12) << "\n";
  os << "  verified:      " << (rep.pass ? "yes" : "no") << "\n";
  os << "L (" << res.L.rows() << " x " << res.L.cols() << ", row-major):\n";
  for (Eigen::Index r = 0; r < res.L.rows(); ++r) {
    os << " ";
    for (Eigen::Index c = 0; c < res.L.cols(); ++c)
      os << " " << fmt_sig(res.L(r, c), 12);
    os << "\n";
  }
  return os.str();
}

}  // namespace riobs
