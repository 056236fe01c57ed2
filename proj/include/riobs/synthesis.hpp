#pragma once

#include "riobs/conic.hpp"
#include "riobs/plant.hpp"

namespace riobs {

// Coefficient matrices of the framer error recursion; the observer gain L
// enters as V_hat = V_a - L V_b and D = D_a - L D_b.
struct ErrorDynamics {
  MatrixXd V_a, V_b;  // measurement noise channels (n x n_v, m2 x n_v)
  MatrixXd D_a, D_b;  // abstraction band channels (n x n, m2 x n)
};

ErrorDynamics error_dynamics_matrices(const TransformedPlant& tp);

// Linear comparison system e+ = (A_t - L C_t) e + (B_t - L D_t) wt whose
// trajectory dominates the framer width elementwise whenever L satisfies
// the elementwise condition P Mp - Gamma Mg >= 0 for the certified P.
// wt stacks the measurement noise, process noise and band widths.
// case_id selects one of three sign structures under which the domination
// argument closes; they differ in how the gain is allowed to act.
struct ComparisonSystem {
  int case_id = 0;
  MatrixXd A_t, C_t;  // n x n, m2 x n
  MatrixXd B_t, D_t;  // n x nw, m2 x nw
  MatrixXd Mp, Mg;    // n x q, m2 x q elementwise condition data
  MatrixXd A, C2;
  ErrorDynamics ed;

  Eigen::Index n() const { return A_t.rows(); }
  Eigen::Index m2() const { return C_t.rows(); }
  Eigen::Index nw() const { return B_t.cols(); }
};

ComparisonSystem build_comparison(const TransformedPlant& tp, int case_id);

// Constant disturbance wt = [width(v); width(w); width(eps)].
VectorXd comparison_disturbance(const TransformedPlant& tp);

VectorXd comparison_step(const ComparisonSystem& cs, const MatrixXd& L,
                         const VectorXd& e, const VectorXd& wt);

struct SynthesisOptions {
  double mu_s = 1e-6;          // uniform definiteness margin on the LMI
  double metzler_cap = 1e-12;  // ceiling on off-diagonal entries of P
  // Slack on the elementwise case rows. Interior iterates respect the rows
  // strictly, so this bounds how far the recovered gain can stray after the
  // inverse map; keep it well below the downstream width comparison tolerance
  // divided by the conditioning of the certificate matrix.
  double case_slack = 1e-12;
  double eta_cap = 1e9;        // keep the feasible set bounded
  double p_cap = 1e9;
  ConeSolveOptions cone;
};

struct SynthesisResult {
  int case_id = 0;
  MatrixXd P, Gamma, L;
  double eta = 0.0;
  ConeSolution sol;
};

// Minimizes the disturbance gain eta over certified (P, Gamma, eta); the
// returned L = P^-1 Gamma is elementwise nonnegative because P is kept an
// M-matrix (positive definite with off-diagonals at most metzler_cap) and
// Gamma nonnegative. Throws InfeasibleError when no certificate exists.
SynthesisResult synthesize_gain(const ComparisonSystem& cs,
                                const SynthesisOptions& opts = {});

// Tries cases 3, 1, 2 in that order and returns the first feasible result.
SynthesisResult synthesize_first_feasible(const TransformedPlant& tp,
                                          const SynthesisOptions& opts = {});

// Certificate inequalities recomputed from scratch at (P, Gamma, eta, L).
// pass requires lmi_min_eig > 0, p_offdiag_max <= 1e-12,
// gamma_min >= -1e-9, case_min >= -1e-9 and pl_residual <= 1e-8.
struct VerificationReport {
  double lmi_min_eig = 0.0;
  double p_offdiag_max = 0.0;
  double gamma_min = 0.0;
  double case_min = 0.0;
  double pl_residual = 0.0;
  bool pass = false;
};

MatrixXd certificate_matrix(const ComparisonSystem& cs, const MatrixXd& P,
                            const MatrixXd& Gamma, double eta);

VerificationReport verify_synthesis(const SynthesisResult& res,
                                    const ComparisonSystem& cs);

}  // namespace riobs
