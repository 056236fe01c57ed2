#include "riobs/observer.hpp"

#include <cmath>
#include <stdexcept>

#include "riobs/util.hpp"

namespace riobs {

namespace {

// x = gamma + LamN z2 - Lambda eps - LamNV2 v, bounded over the eps and v
// boxes with gamma interval valued.
IntervalVector frame_state(const ObserverGains& g, const IntervalVector& gamma,
                           const VectorXd& z2) {
  const VectorXd base = g.LamN * z2;
  const IntervalVector& e = g.eps;
  const IntervalVector& v = g.noise_v;
  IntervalVector x(
      gamma.lo + base + g.Lambda_s.neg * e.lo - g.Lambda_s.pos * e.hi +
          g.LamNV2_s.neg * v.lo - g.LamNV2_s.pos * v.hi,
      gamma.hi + base + g.Lambda_s.neg * e.hi - g.Lambda_s.pos * e.lo +
          g.LamNV2_s.neg * v.hi - g.LamNV2_s.pos * v.lo);
  return x;
}

IntervalVector next_gamma(const TransformedPlant& tp, const ObserverGains& g,
                          const IntervalVector& gamma,
                          const IntervalVector& xc, const VectorXd& z1,
                          const VectorXd& z2, VectorXd* delta_rho,
                          VectorXd* delta_psi2) {
  const VectorXd mu_rho_lo = tight_decomp(tp.rho, xc.lo, xc.hi);
  const VectorXd mu_rho_hi = tight_decomp(tp.rho, xc.hi, xc.lo);
  const VectorXd psi_lo = tight_decomp(tp.psi2, xc.lo, xc.hi);
  const VectorXd psi_hi = tight_decomp(tp.psi2, xc.hi, xc.lo);
  if (delta_rho) *delta_rho = mu_rho_hi - mu_rho_lo;
  if (delta_psi2) *delta_psi2 = psi_hi - psi_lo;
  const VectorXd zhat = g.Z1c * z1 + g.Z2c * z2;
  const IntervalVector& e = g.eps;
  const IntervalVector& v = g.noise_v;
  const IntervalVector& w = g.noise_w;
  IntervalVector out(
      g.ALC.pos * gamma.lo - g.ALC.neg * gamma.hi + mu_rho_lo +
          g.D_s.neg * e.lo - g.D_s.pos * e.hi + g.Ls.neg * psi_lo -
          g.Ls.pos * psi_hi + g.V_hat_s.neg * v.lo - g.V_hat_s.pos * v.hi +
          g.W_hat_s.pos * w.lo - g.W_hat_s.neg * w.hi + zhat,
      g.ALC.pos * gamma.hi - g.ALC.neg * gamma.lo + mu_rho_hi +
          g.D_s.neg * e.hi - g.D_s.pos * e.lo + g.Ls.neg * psi_hi -
          g.Ls.pos * psi_lo + g.V_hat_s.neg * v.hi - g.V_hat_s.pos * v.lo +
          g.W_hat_s.pos * w.hi - g.W_hat_s.neg * w.lo + zhat);
  return out;
}

}  // namespace

ObserverGains make_observer_gains(const TransformedPlant& tp,
                                  const MatrixXd& L) {
  if (L.rows() != tp.n || L.cols() != tp.m2)
    throw std::invalid_argument("gain matrix has the wrong shape");
  if (!L.allFinite())
    throw std::invalid_argument("gain matrix must be finite");
  ObserverGains g;
  g.L = L;
  const MatrixXd ALC = tp.A - L * tp.C2;
  const ErrorDynamics ed = error_dynamics_matrices(tp);
  g.V_hat = ed.V_a - L * ed.V_b;
  g.D = ed.D_a - L * ed.D_b;
  g.W_hat = tp.W_hat;
  g.ALC = split(ALC);
  g.Ls = split(L);
  g.V_hat_s = split(g.V_hat);
  g.W_hat_s = split(tp.W_hat);
  g.D_s = split(g.D);
  g.Lambda_s = split(tp.Lambda);
  g.LamN = tp.Lambda * tp.N;
  g.LamNV2_s = split(g.LamN * tp.V2);
  g.Phi_s = split(tp.Phi);
  g.PhiW_s = split(tp.Phi * tp.plant.W);
  g.A_v_s = split(tp.A_v);
  g.Z1c = tp.Lambda *
          (MatrixXd::Identity(tp.n, tp.n) - tp.N * tp.C2) * tp.G1 * tp.ad.S;
  g.Z2c = L + ALC * g.LamN;
  g.A_z = tp.A_z;
  g.eps = tp.eps;
  g.noise_w = tp.plant.noise_w;
  g.noise_v = tp.plant.noise_v;
  return g;
}

FramerState observer_init(const TransformedPlant& tp,
                          const ObserverGains& /*gains*/) {
  FramerState st;
  const MatrixXd Mo =
      tp.Lambda * (MatrixXd::Identity(tp.n, tp.n) - tp.N * tp.C2);
  st.gamma = bound_linear_map(Mo, tp.plant.x0);
  st.x_prev_c = tp.plant.x0;
  st.z1_prev = VectorXd::Zero(tp.ad.p_H);
  st.k = 0;
  return st;
}

IntervalVector reconstruct_input(const TransformedPlant& tp,
                                 const ObserverGains& g,
                                 const IntervalVector& xk_c,
                                 const IntervalVector& xprev_c,
                                 const VectorXd& z1_prev) {
  const IntervalVector kb = embed_step(tp.kappa, xprev_c);
  const VectorXd az = g.A_z * z1_prev;
  const IntervalVector& v = g.noise_v;
  const IntervalVector& w = g.noise_w;
  IntervalVector d(
      g.Phi_s.pos * xk_c.lo - g.Phi_s.neg * xk_c.hi + kb.lo + az +
          g.A_v_s.pos * v.lo - g.A_v_s.neg * v.hi + g.PhiW_s.neg * w.lo -
          g.PhiW_s.pos * w.hi,
      g.Phi_s.pos * xk_c.hi - g.Phi_s.neg * xk_c.lo + kb.hi + az +
          g.A_v_s.pos * v.hi - g.A_v_s.neg * v.lo + g.PhiW_s.neg * w.hi -
          g.PhiW_s.pos * w.lo);
  return d;
}

StepResult observer_step(const TransformedPlant& tp, const ObserverGains& g,
                         FramerState& st, const VectorXd& z1,
                         const VectorXd& z2, const ObserverOptions& opt) {
  if (z1.size() != tp.ad.p_H || z2.size() != tp.m2)
    throw std::invalid_argument("measurement split has the wrong sizes");
  StepResult out;
  out.x = frame_state(g, st.gamma, z2);
  const bool finite = out.x.lo.allFinite() && out.x.hi.allFinite();
  if (!finite || out.x.width().maxCoeff() > opt.width_cap) {
    out.diverged = true;
    return out;
  }
  if (opt.guard_enabled) {
    const VectorXd margin = opt.domain_guard_margin * tp.plant.box.width();
    if (((tp.plant.box.lo - out.x.lo).array() > margin.array()).any() ||
        ((out.x.hi - tp.plant.box.hi).array() > margin.array()).any())
      throw DomainEscapeError(
          "state framer left the operating box at index " +
          std::to_string(st.k) +
          "; the decomposition bounds no longer carry information");
  }
  const IntervalVector xc = intersect(out.x, tp.plant.box);
  if (st.k >= 1 && tp.p > 0) {
    out.d = reconstruct_input(tp, g, xc, st.x_prev_c, st.z1_prev);
    out.has_d = true;
  }
  st.gamma = next_gamma(tp, g, st.gamma, xc, z1, z2, &out.delta_rho,
                        &out.delta_psi2);
  st.x_prev_c = xc;
  st.z1_prev = z1;
  ++st.k;
  return out;
}

FramerTrajectory observer_run(const TransformedPlant& tp,
                              const ObserverGains& g,
                              const std::vector<VectorXd>& z1s,
                              const std::vector<VectorXd>& z2s,
                              const ObserverOptions& opt) {
  if (z1s.size() != z2s.size())
    throw std::invalid_argument("measurement sequences must be equally long");
  FramerTrajectory traj;
  if (z1s.empty()) {
    // No data: the only honest report is the initial interval itself.
    traj.x.push_back(tp.plant.x0);
    traj.ex_inf.push_back(tp.plant.x0.width().maxCoeff());
    return traj;
  }
  FramerState st = observer_init(tp, g);
  traj.x.reserve(z1s.size());
  for (size_t k = 0; k < z1s.size(); ++k) {
    StepResult sr = observer_step(tp, g, st, z1s[k], z2s[k], opt);
    if (sr.diverged) {
      traj.diverged = true;
      break;
    }
    traj.x.push_back(sr.x);
    traj.ex_inf.push_back(sr.x.width().maxCoeff());
    if (sr.has_d) {
      traj.d.push_back(sr.d);
      traj.ed_inf.push_back(sr.d.size() ? sr.d.width().maxCoeff() : 0.0);
    }
    traj.delta_rho.push_back(sr.delta_rho);
    traj.delta_psi2.push_back(sr.delta_psi2);
  }
  return traj;
}

}  // namespace riobs
