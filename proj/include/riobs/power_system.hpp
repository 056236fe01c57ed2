#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riobs/plant.hpp"
#include "riobs/rng.hpp"

namespace riobs {

// Multi-area swing dynamics under forward Euler. State layout is
// (angle_1, freq_1, ..., angle_B, freq_B).
struct PowerSystemConfig {
  VectorXd inertia;  // size B
  VectorXd damping;  // size B
  MatrixXd tie;      // B x B, symmetric, zero diagonal, nonnegative
  double dt = 0.01;
  IntervalVector noise_w;  // raw per-equation disturbance, scaled by dt
  IntervalVector noise_v;
  IntervalVector x0, box;
  MatrixXd G, H;  // attack injection columns

  Eigen::Index buses() const { return inertia.size(); }
  Eigen::Index n() const { return 2 * inertia.size(); }
};

struct BuiltPlant {
  PlantModel plant;
  std::vector<std::string> warnings;
};

BuiltPlant build_power_plant(const PowerSystemConfig& cfg);

// Tight range of cos over [lo, hi].
std::pair<double, double> cos_range(double lo, double hi);

enum class AttackKind { Zero, Step, Ramp, Sine, Random };

struct AttackTerm {
  AttackKind kind = AttackKind::Zero;
  double amplitude = 0.0;
  long onset = 0;
  // Ramp: rise time in steps, holding the amplitude afterwards. Step, Sine,
  // Random: active window after onset, 0 meaning open ended.
  long length = 0;
  double period = 100;  // sine period in steps
  double phase = 0.0;
};

using AttackSignal = std::vector<AttackTerm>;

struct AttackScenario {
  std::vector<AttackSignal> channels;  // one per attack input
};

// Per-step attack values for k = 0..steps; random terms draw from a stream
// derived from (seed, channel index) so sequences are reproducible.
std::vector<VectorXd> attack_sequence(const AttackScenario& sc,
                                      Eigen::Index p, long steps,
                                      uint64_t seed);

struct SimOptions {
  bool vertex_noise = false;  // sample noise on box corners instead of inside
  bool x0_at_mid = true;      // truth starts at the center of the x0 box
};

struct SimResult {
  std::vector<VectorXd> x;   // truth, length steps + 1
  std::vector<VectorXd> d;   // applied attack, length steps + 1
  std::vector<VectorXd> v;   // measurement noise, length steps + 1
  std::vector<VectorXd> w;   // process noise, length steps
  std::vector<VectorXd> y;   // raw outputs, length steps + 1
  std::vector<VectorXd> z1;  // attacked output coordinates
  std::vector<VectorXd> z2;  // attack-free output coordinates
};

// Throws ScenarioError if the truth leaves the operating box: the scenario
// contradicts the declared box, which every guarantee is conditioned on.
SimResult simulate_plant(const TransformedPlant& tp, const AttackScenario& sc,
                         long steps, uint64_t seed, const SimOptions& opt = {});

struct RunMetrics {
  double containment_x = 0.0;  // fraction of indices framed
  double containment_d = 0.0;
  double width_x_final = 0.0;
  double width_d_final = 0.0;
  bool settled = false;
  bool diverged = false;
  long checked_x = 0, checked_d = 0;
};

struct FramerTrajectory;

RunMetrics evaluate_run(const FramerTrajectory& traj, const SimResult& sim,
                        double tol = 1e-9, double settle_tol = 1e-3,
                        long settle_window = 300);

}  // namespace riobs
