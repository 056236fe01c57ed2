#pragma once

#include <functional>
#include <vector>

#include "riobs/interval.hpp"

namespace riobs {

// Nonlinear map together with entrywise Jacobian bounds valid on a box.
// The bounds are caller-supplied (closed-form per model); nothing here
// differentiates anything.
struct DifferentiableMap {
  std::function<VectorXd(const VectorXd&)> eval;
  MatrixXd jac_lo;  // p x n
  MatrixXd jac_hi;  // p x n
  IntervalVector domain;

  Eigen::Index out_dim() const { return jac_lo.rows(); }
  Eigen::Index in_dim() const { return jac_lo.cols(); }
};

// Which Jacobian bound becomes the linear part H of f(z) = H z + mu(z).
// Upper gives the smaller tightness matrix (J_hi - J_lo vs twice that).
enum class SlopePolicy { Upper, Lower };

// Remainder-form decomposition with a sign-stable remainder: each entry of
// mu's Jacobian interval lies entirely in R>=0 or entirely in R<=0.
struct JssForm {
  MatrixXd H;
  DifferentiableMap mu;   // jac bounds are f's shifted by -H
  MatrixXd increasing;    // p x n, 1 where mu is nondecreasing in z_j
  MatrixXd F_bar;         // p x n, >= 0

  Eigen::Index out_dim() const { return H.rows(); }
  Eigen::Index in_dim() const { return H.cols(); }
};

JssForm jss_decompose(const DifferentiableMap& f,
                      SlopePolicy policy = SlopePolicy::Upper);

// Per output row i, the binary diagonal D^i selecting which argument of the
// tight decomposition feeds coordinate j.
std::vector<MatrixXd> selector_matrices(const JssForm& jss);

// mu_d(z1, z2): row i evaluated at D^i z1 + (I - D^i) z2. Nondecreasing in
// z1 and nonincreasing in z2 over ordered pairs; equals mu(z) on the
// diagonal. Arguments must lie in the domain box.
VectorXd tight_decomp(const JssForm& jss, const VectorXd& z1,
                      const VectorXd& z2);

// Interval extension of f over the box:
// [H+ lo - H- hi + mu_d(lo, hi), H+ hi - H- lo + mu_d(hi, lo)].
IntervalVector embed_step(const JssForm& jss, const IntervalVector& box);

}  // namespace riobs
