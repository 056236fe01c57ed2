#pragma once

// Batch runner: simulate truth trajectories per seed, run the framer over
// the recorded measurements, score containment/width/settling, and write
// the CSV/report artifacts consumed by the CLI and the plot script.

#include <cstdint>
#include <string>
#include <vector>

#include "riobs/observer.hpp"
#include "riobs/power_system.hpp"
#include "riobs/synthesis.hpp"

namespace riobs {

struct BatchOptions {
  long steps = 3000;
  std::vector<std::uint64_t> seeds;
  ObserverOptions observer;
  SimOptions sim;
  double contain_tol = 1e-9;
  double settle_tol = 1e-3;
  int settle_window = 300;
  // 0: take RIOBS_THREADS from the environment, else hardware concurrency.
  int threads = 0;
  std::string out_dir;  // empty: keep everything in memory, write nothing
  bool write_plot_script = true;
};

struct SeedRun {
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

struct BatchResult {
  std::vector<SeedRun> runs;  // sorted by seed
};

/* Worker cap: explicit option wins, then RIOBS_THREADS, then hardware. */
int resolve_thread_cap(int requested, std::size_t jobs);

/* One seed end to end; the caller owns any file writing. */
RunMetrics run_single(const TransformedPlant& tp, const ObserverGains& gains,
                      const AttackScenario& sc, std::uint64_t seed,
                      const BatchOptions& opt, FramerTrajectory* traj_out,
                      SimResult* sim_out);

/* Fan out over seeds, write run_seed_<s>.csv, metrics.csv and the plot
   script under opt.out_dir when set. Rethrows the first per-seed failure
   in seed order. */
BatchResult run_batch(const TransformedPlant& tp, const Eigen::MatrixXd& L,
                      const AttackScenario& sc, const BatchOptions& opt);

/* Interval trace of one run, twelve significant digits, stable layout:
   k, state corners, input corners, sup-norm widths, containment flags.
   Input fields are nan at k = 0 where no input interval exists yet. */
void write_run_csv(const std::string& path, const FramerTrajectory& traj,
                   const SimResult& sim, double contain_tol);

/* seed, containment_x, containment_d, width_x_final, width_d_final, settled.
   settled is 1 (steady), 0 (still moving), -1 (widths diverged). */
void write_metrics_csv(const std::string& path,
                       const std::vector<SeedRun>& runs);

/* Self-contained matplotlib script that charts every run_seed_*.csv
   sitting next to it. */
void write_plot_script(const std::string& path);

/* Plain-text gain container: header lines then row-major entries at full
   double precision, so a reload reproduces the run bit for bit. */
struct GainFile {
  int case_id = 0;
  double eta = 0.0;
  Eigen::MatrixXd L;
};

void write_gain_file(const std::string& path, int case_id, double eta,
                     const Eigen::MatrixXd& L);
GainFile read_gain_file(const std::string& path);

/* Human-readable synthesis report. */
std::string gain_report(const SynthesisResult& res,
                        const VerificationReport& rep);

}  // namespace riobs
