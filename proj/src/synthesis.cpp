#include "riobs/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <string>
#include <utility>

#include "riobs/util.hpp"

namespace riobs {

namespace {

// Decision vector layout: upper triangle of P row by row, then Gamma row
// major, then eta last.
struct VarMap {
  Eigen::Index n, m2;
  int p_idx(Eigen::Index i, Eigen::Index j) const {
    if (i > j) std::swap(i, j);
    return static_cast<int>(i * n - i * (i - 1) / 2 + (j - i));
  }
  int g_idx(Eigen::Index r, Eigen::Index q) const {
    return static_cast<int>(n * (n + 1) / 2 + r * m2 + q);
  }
  int eta_idx() const { return static_cast<int>(n * (n + 1) / 2 + n * m2); }
  int nvar() const { return eta_idx() + 1; }
};

}  // namespace

ErrorDynamics error_dynamics_matrices(const TransformedPlant& tp) {
  ErrorDynamics ed;
  const MatrixXd LamN = tp.Lambda * tp.N;
  const MatrixXd Mo =
      tp.Lambda * (MatrixXd::Identity(tp.n, tp.n) - tp.N * tp.C2);
  ed.V_a = tp.A * LamN * tp.V2 + Mo * tp.G1 * tp.ad.S * tp.V1;
  ed.V_b = (tp.C2 * LamN - MatrixXd::Identity(tp.m2, tp.m2)) * tp.V2;
  ed.D_a = tp.A * tp.Lambda;
  ed.D_b = tp.C2 * tp.Lambda;
  return ed;
}

ComparisonSystem build_comparison(const TransformedPlant& tp, int case_id) {
  if (case_id < 1 || case_id > 3)
    throw std::invalid_argument("case_id must be 1, 2 or 3");
  const Eigen::Index n = tp.n, m2 = tp.m2;
  const Eigen::Index n_v = tp.plant.V.cols(), n_w = tp.plant.W.cols();
  ComparisonSystem cs;
  cs.case_id = case_id;
  cs.A = tp.A;
  cs.C2 = tp.C2;
  cs.ed = error_dynamics_matrices(tp);

  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd LamNV2_abs = (tp.Lambda * tp.N * tp.V2).cwiseAbs();
  const MatrixXd Lam_abs = tp.Lambda.cwiseAbs();
  const MatrixXd What_abs = tp.W_hat.cwiseAbs();

  MatrixXd B_v, B_e, D_v, D_e;
  const MatrixXd B_w = What_abs;
  const MatrixXd D_w = MatrixXd::Zero(m2, n_w);
  switch (case_id) {
    case 1: {
      cs.A_t = tp.A + tp.rho.F_bar;
      cs.C_t = tp.C2 - tp.psi2.F_bar;
      B_v = cs.ed.V_a + (I - tp.A) * LamNV2_abs;
      B_e = cs.ed.D_a + (I - tp.A) * Lam_abs;
      D_v = cs.ed.V_b - tp.C2 * LamNV2_abs;
      D_e = cs.ed.D_b - tp.C2 * Lam_abs;
      cs.Mp = MatrixXd(n, n + n_v + n);
      cs.Mp << tp.A, cs.ed.V_a, cs.ed.D_a;
      cs.Mg = MatrixXd(m2, n + n_v + n);
      cs.Mg << tp.C2, cs.ed.V_b, cs.ed.D_b;
      break;
    }
    case 2: {
      const MatrixXd Aabs = tp.A.cwiseAbs();
      cs.A_t = Aabs + tp.rho.F_bar;
      cs.C_t = -tp.C2 - tp.psi2.F_bar;
      B_v = cs.ed.V_a.cwiseAbs() + (I - Aabs) * LamNV2_abs;
      B_e = (I - Aabs) * Lam_abs + cs.ed.D_a.cwiseAbs();
      D_v = tp.C2 * LamNV2_abs - cs.ed.V_b;
      D_e = tp.C2 * Lam_abs - cs.ed.D_b;
      cs.Mp = MatrixXd::Zero(n, n + n_v + n);
      cs.Mg = MatrixXd(m2, n + n_v + n);
      cs.Mg << tp.C2, cs.ed.V_b, cs.ed.D_b;
      cs.Mg = -cs.Mg;
      break;
    }
    case 3: {
      cs.A_t = tp.A + tp.rho.F_bar;
      cs.C_t = tp.C2 - tp.psi2.F_bar;
      const MatrixXd Mo = tp.Lambda * (I - tp.N * tp.C2);
      B_v = (Mo * tp.G1 * tp.ad.S * tp.V1).cwiseAbs() + LamNV2_abs;
      B_e = Lam_abs;
      D_v = -tp.V2;
      D_e = MatrixXd::Zero(m2, n);
      cs.Mp = tp.A;
      cs.Mg = tp.C2;
      break;
    }
  }
  cs.B_t = MatrixXd(n, n_v + n_w + n);
  cs.B_t << B_v, B_w, B_e;
  cs.D_t = MatrixXd(m2, n_v + n_w + n);
  cs.D_t << D_v, D_w, D_e;
  return cs;
}

VectorXd comparison_disturbance(const TransformedPlant& tp) {
  VectorXd wt(tp.plant.V.cols() + tp.plant.W.cols() + tp.n);
  wt << tp.plant.noise_v.width(), tp.plant.noise_w.width(), tp.eps.width();
  return wt;
}

VectorXd comparison_step(const ComparisonSystem& cs, const MatrixXd& L,
                         const VectorXd& e, const VectorXd& wt) {
  return (cs.A_t - L * cs.C_t) * e + (cs.B_t - L * cs.D_t) * wt;
}

SynthesisResult synthesize_gain(const ComparisonSystem& cs,
                                const SynthesisOptions& opts) {
  const Eigen::Index n = cs.n(), m2 = cs.m2(), nw = cs.nw();
  const VarMap vm{n, m2};
  ConeProgram prob;
  prob.nvar = vm.nvar();
  prob.c = VectorXd::Zero(prob.nvar);
  prob.c(vm.eta_idx()) = 1.0;

  // Certificate matrix, shifted so the barrier interior is the mu_s margin:
  // [ P              P A_t - G C_t   P B_t - G D_t   0    ]
  // [ .              P               0               I    ]
  // [ .              .               eta I           0    ]
  // [ .              .               .               eta I]
  MatBlock big;
  const Eigen::Index dim = 3 * n + nw;
  big.dim = static_cast<int>(dim);
  big.F0 = MatrixXd::Zero(dim, dim);
  big.F0.diagonal().setConstant(-opts.mu_s);
  big.F0.block(n, 2 * n + nw, n, n) = MatrixXd::Identity(n, n);
  big.F0.block(2 * n + nw, n, n, n) = MatrixXd::Identity(n, n);
  auto add = [&big](int var, Eigen::Index r, Eigen::Index c, double v) {
    if (v != 0.0)
      big.entries.push_back(
          {var, static_cast<int>(r), static_cast<int>(c), v});
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const int var = vm.p_idx(i, j);
      add(var, i, j, 1.0);
      add(var, n + i, n + j, 1.0);
      for (Eigen::Index c = 0; c < n; ++c) {
        add(var, i, n + c, cs.A_t(j, c));
        if (i != j) add(var, j, n + c, cs.A_t(i, c));
      }
      for (Eigen::Index c = 0; c < nw; ++c) {
        add(var, i, 2 * n + c, cs.B_t(j, c));
        if (i != j) add(var, j, 2 * n + c, cs.B_t(i, c));
      }
    }
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index q = 0; q < m2; ++q) {
      const int var = vm.g_idx(r, q);
      for (Eigen::Index c = 0; c < n; ++c) add(var, r, n + c, -cs.C_t(q, c));
      for (Eigen::Index c = 0; c < nw; ++c)
        add(var, r, 2 * n + c, -cs.D_t(q, c));
    }
  for (Eigen::Index c = 0; c < nw + n; ++c)
    add(vm.eta_idx(), 2 * n + c, 2 * n + c, 1.0);
  prob.blocks.push_back(std::move(big));

  MatBlock pb;
  pb.dim = static_cast<int>(n);
  pb.F0 = -opts.mu_s * MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      pb.entries.push_back(
          {vm.p_idx(i, j), static_cast<int>(i), static_cast<int>(j), 1.0});
  prob.blocks.push_back(std::move(pb));

  const Eigen::Index q_cols = cs.Mp.cols();
  const Eigen::Index rows = n * (n - 1) / 2 + n * m2 + n * q_cols + 1 + n;
  prob.G = MatrixXd::Zero(rows, prob.nvar);
  prob.h = VectorXd::Zero(rows);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      prob.G(row, vm.p_idx(i, j)) = -1.0;
      prob.h(row) = opts.metzler_cap;
      ++row;
    }
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index q = 0; q < m2; ++q) {
      prob.G(row, vm.g_idx(r, q)) = 1.0;
      ++row;
    }
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < q_cols; ++c) {
      for (Eigen::Index k = 0; k < n; ++k)
        prob.G(row, vm.p_idx(std::min(r, k), std::max(r, k))) += cs.Mp(k, c);
      for (Eigen::Index qq = 0; qq < m2; ++qq)
        prob.G(row, vm.g_idx(r, qq)) -= cs.Mg(qq, c);
      prob.h(row) = opts.case_slack;
      ++row;
    }
  prob.G(row, vm.eta_idx()) = -1.0;
  prob.h(row) = opts.eta_cap;
  ++row;
  for (Eigen::Index i = 0; i < n; ++i) {
    prob.G(row, vm.p_idx(i, i)) = -1.0;
    prob.h(row) = opts.p_cap;
    ++row;
  }

  ConeSolution sol = solve_cone(prob, opts.cone);
  if (!sol.feasible)
    throw InfeasibleError(
        cs.case_id,
        "case " + std::to_string(cs.case_id) +
            ": no gain certificate at the configured margins (phase-1 shift " +
            fmt_sig(sol.infeas_margin, 3) +
            "); check whether the attack-free measurement pair is detectable "
            "in the positive-systems sense");

  SynthesisResult res;
  res.case_id = cs.case_id;
  res.sol = sol;
  res.eta = sol.x(vm.eta_idx());
  res.P = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      res.P(i, j) = res.P(j, i) = sol.x(vm.p_idx(i, j));
  res.Gamma = MatrixXd::Zero(n, m2);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index q = 0; q < m2; ++q)
      res.Gamma(r, q) = sol.x(vm.g_idx(r, q));
  res.L = res.P.ldlt().solve(res.Gamma);
  return res;
}

SynthesisResult synthesize_first_feasible(const TransformedPlant& tp,
                                          const SynthesisOptions& opts) {
  std::string notes;
  for (int c : {3, 1, 2}) {
    try {
      return synthesize_gain(build_comparison(tp, c), opts);
    } catch (const InfeasibleError& e) {
      if (!notes.empty()) notes += "; ";
      notes += e.what();
    }
  }
  throw InfeasibleError(0,
                        "no comparison case admits a certificate; check "
                        "whether the attack-free measurement pair is "
                        "detectable in the positive-systems sense (" +
                            notes + ")");
}

MatrixXd certificate_matrix(const ComparisonSystem& cs, const MatrixXd& P,
                            const MatrixXd& Gamma, double eta) {
  const Eigen::Index n = cs.n(), nw = cs.nw();
  const Eigen::Index dim = 3 * n + nw;
  MatrixXd M = MatrixXd::Zero(dim, dim);
  M.block(0, 0, n, n) = P;
  M.block(0, n, n, n) = P * cs.A_t - Gamma * cs.C_t;
  M.block(0, 2 * n, n, nw) = P * cs.B_t - Gamma * cs.D_t;
  M.block(n, n, n, n) = P;
  M.block(n, 2 * n + nw, n, n) = MatrixXd::Identity(n, n);
  M.block(2 * n, 2 * n, nw, nw) = eta * MatrixXd::Identity(nw, nw);
  M.block(2 * n + nw, 2 * n + nw, n, n) = eta * MatrixXd::Identity(n, n);
  return MatrixXd(M.selfadjointView<Eigen::Upper>());
}

VerificationReport verify_synthesis(const SynthesisResult& res,
                                    const ComparisonSystem& cs) {
  VerificationReport rep;
  const Eigen::Index n = cs.n();
  const MatrixXd M = certificate_matrix(cs, res.P, res.Gamma, res.eta);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
  rep.lmi_min_eig = es.eigenvalues()(0);
  rep.p_offdiag_max = n > 1 ? -std::numeric_limits<double>::infinity() : 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) rep.p_offdiag_max = std::max(rep.p_offdiag_max, res.P(i, j));
  rep.gamma_min = res.Gamma.size() ? res.Gamma.minCoeff() : 0.0;
  const MatrixXd case_mat = res.P * cs.Mp - res.Gamma * cs.Mg;
  rep.case_min = case_mat.size() ? case_mat.minCoeff() : 0.0;
  rep.pl_residual =
      res.Gamma.size() ? (res.P * res.L - res.Gamma).cwiseAbs().maxCoeff()
                       : 0.0;
  rep.pass = rep.lmi_min_eig > 0.0 && rep.p_offdiag_max <= 1e-12 &&
             rep.gamma_min >= -1e-9 && rep.case_min >= -1e-9 &&
             rep.pl_residual <= 1e-8;
  return rep;
}

}  // namespace riobs
