#pragma once

#include <vector>

#include "riobs/interval.hpp"

namespace riobs {

// Small dense conic feasibility/optimization problems:
//   minimize c'x
//   subject to   (G x + h)_r >= 0                       (scalar rows)
//                F0_b + sum_q x_q * Fq_b  PSD            (matrix blocks)
// solved by a two-phase logarithmic-barrier path follower with exact
// Newton steps. Problems here are tiny (a few hundred variables, block
// order <= ~130), so dense factorizations throughout.

// Adds v at (r,c) and, when r != c, at (c,r) of block coefficient Fq for
// variable `var`.
struct MatBlockEntry {
  int var;
  int r;
  int c;
  double v;
};

struct MatBlock {
  int dim = 0;
  MatrixXd F0;
  std::vector<MatBlockEntry> entries;
};

struct ConeProgram {
  int nvar = 0;
  VectorXd c;
  MatrixXd G;  // rows x nvar; may have zero rows
  VectorXd h;
  std::vector<MatBlock> blocks;
};

struct ConeSolveOptions {
  double gap_tol = 1e-8;      // stop when the barrier gap bound m/t drops below
  double mu_update = 30.0;    // barrier parameter growth per outer step
  int max_center_iters = 1200; // Newton iterations per centering
  int max_total_iters = 120000;
  double infeas_tol = 1e-13;  // phase-1 shift above -infeas_tol => infeasible
};

struct ConeSolution {
  VectorXd x;
  bool feasible = false;
  double obj = 0.0;
  double gap_bound = 0.0;      // certified distance to the optimum
  double infeas_margin = 0.0;  // phase-1 shift at termination (>0: infeasible)
  int iters = 0;
};

ConeSolution solve_cone(const ConeProgram& prob,
                        const ConeSolveOptions& opts = {},
                        const VectorXd* x_init = nullptr);

}  // namespace riobs
