#pragma once

#include <vector>

#include "riobs/plant.hpp"
#include "riobs/synthesis.hpp"

namespace riobs {

struct ObserverOptions {
  // Abort when the framer leaves the operating box by more than this
  // fraction of the box width; the bounds still hold but carry nothing.
  double domain_guard_margin = 0.1;
  bool guard_enabled = true;
  // A framer wider than this is reported as diverged and the run stops.
  double width_cap = 1e12;
};

// Everything the per-step recursion needs, with the sign splits done once.
struct ObserverGains {
  MatrixXd L;
  MatrixXd V_hat, W_hat, D;
  MatrixSplit ALC;  // A - L C2
  MatrixSplit Ls, V_hat_s, W_hat_s, D_s;
  MatrixSplit Lambda_s, LamNV2_s, Phi_s, PhiW_s, A_v_s;
  MatrixXd Z1c;  // feeds z1 into the gamma update
  MatrixXd Z2c;  // feeds z2 into the gamma update
  MatrixXd LamN, A_z;
  IntervalVector eps, noise_w, noise_v;
};

ObserverGains make_observer_gains(const TransformedPlant& tp,
                                  const MatrixXd& L);

struct FramerState {
  long k = 0;
  IntervalVector gamma;
  IntervalVector x_prev_c;  // previous state framer clipped to the box
  VectorXd z1_prev;
};

FramerState observer_init(const TransformedPlant& tp,
                          const ObserverGains& gains);

struct StepResult {
  IntervalVector x;  // state framer at the current index
  IntervalVector d;  // attack framer for the previous index (when has_d)
  bool has_d = false;
  VectorXd delta_rho, delta_psi2;  // realized decomposition gaps
  bool diverged = false;
};

// Advances one measurement pair (z1_k, z2_k). Throws DomainEscapeError when
// the guard is enabled and the framer drifts out of the operating box.
StepResult observer_step(const TransformedPlant& tp, const ObserverGains& g,
                         FramerState& st, const VectorXd& z1,
                         const VectorXd& z2, const ObserverOptions& opt = {});

// Attack bounds for the previous index from the current and previous state
// framers (both clipped to the box) and the previous z1 sample.
IntervalVector reconstruct_input(const TransformedPlant& tp,
                                 const ObserverGains& g,
                                 const IntervalVector& xk_c,
                                 const IntervalVector& xprev_c,
                                 const VectorXd& z1_prev);

struct FramerTrajectory {
  std::vector<IntervalVector> x;  // per index 0..K (shorter if diverged)
  std::vector<IntervalVector> d;  // entry j bounds the attack at index j
  std::vector<double> ex_inf, ed_inf;
  std::vector<VectorXd> delta_rho, delta_psi2;
  bool diverged = false;
};

// z1s and z2s hold one sample per index 0..K.
FramerTrajectory observer_run(const TransformedPlant& tp,
                              const ObserverGains& g,
                              const std::vector<VectorXd>& z1s,
                              const std::vector<VectorXd>& z2s,
                              const ObserverOptions& opt = {});

}  // namespace riobs
