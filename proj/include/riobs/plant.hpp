#pragma once

#include "riobs/abstraction.hpp"
#include "riobs/decomposition.hpp"
#include "riobs/interval.hpp"

namespace riobs {

// Discrete-time plant
//   x+ = f(x) + W w + G d
//   y  = h(x) + V v + H d
// with unknown input d, noise (w, v) in known boxes, initial state in x0,
// and all states confined to the bounded operating box.
struct PlantModel {
  DifferentiableMap f;  // n -> n
  DifferentiableMap h;  // n -> l
  MatrixXd W;           // n x n_w
  MatrixXd V;           // l x n_v
  MatrixXd G;           // n x p
  MatrixXd H;           // l x p
  IntervalVector noise_w;
  IntervalVector noise_v;
  IntervalVector x0;
  IntervalVector box;

  Eigen::Index n() const { return f.out_dim(); }
  Eigen::Index l() const { return h.out_dim(); }
  Eigen::Index p() const { return G.cols(); }
};

// SVD split of the measurement attack matrix H = U1 Xi E1' and the induced
// output/input coordinates. U2 spans the attack-free measurement directions.
struct AttackDecomposition {
  Eigen::Index p_H = 0;
  MatrixXd U1, U2;  // l x p_H, l x (l - p_H)
  MatrixXd E1, E2;  // p x p_H, p x (p - p_H)
  MatrixXd Xi, S;   // p_H x p_H, S = Xi^-1
  MatrixXd T1, T2;  // U1', U2'
};

// rank_tol < 0 selects the default 1e-10 * largest singular value.
AttackDecomposition decompose_attack_matrix(const MatrixXd& H,
                                            double rank_tol = -1.0);

// Everything the observer and the gain synthesis consume, derived once.
struct TransformedPlant {
  PlantModel plant;
  AttackDecomposition ad;
  Eigen::Index n = 0, l = 0, p = 0, m2 = 0;  // m2 = l - p_H

  DifferentiableMap h1, h2;
  MatrixXd V1, V2, G1, G2;
  JssForm psi2;  // h2 = C2 x + psi2
  MatrixXd C2;
  bool psi2_zero = false;

  AffineAbstraction g_abs;  // of g(x) = x + N psi2(x); trivial when psi2 == 0
  MatrixXd M2, N;
  MatrixXd A_g, Lambda;
  IntervalVector eps;

  JssForm rho;  // f_tilde = A x + rho
  MatrixXd A;
  JssForm kappa;
  MatrixXd Phi, A_v, A_z, W_hat;
};

// abstraction_sigma (size n) is required only when psi2 is nonlinear; it
// must bound the interior deviation of g over the box.
TransformedPlant transform_plant(const PlantModel& plant,
                                 const VectorXd& abstraction_sigma = VectorXd());

// d1 = S (z1 - h1(x) - V1 v); exact under exact arguments, empty when p_H=0.
VectorXd reconstruct_d1(const TransformedPlant& tp, const VectorXd& z1,
                        const VectorXd& x, const VectorXd& v);

}  // namespace riobs
