#pragma once

#include <Eigen/Dense>
#include <utility>

namespace riobs {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Axis-aligned box { z : lo <= z <= hi }, componentwise.
struct IntervalVector {
  VectorXd lo;
  VectorXd hi;

  IntervalVector() = default;
  IntervalVector(VectorXd l, VectorXd h) : lo(std::move(l)), hi(std::move(h)) {}

  static IntervalVector point(const VectorXd& z) { return {z, z}; }

  Eigen::Index size() const { return lo.size(); }
  bool valid() const;
  VectorXd width() const { return hi - lo; }
  VectorXd mid() const { return 0.5 * (lo + hi); }

  bool contains(const VectorXd& z, double tol = 1e-9) const;
  bool contains(const IntervalVector& inner, double tol = 1e-9) const;
};

IntervalVector operator+(const IntervalVector& a, const IntervalVector& b);

// Componentwise intersection. A coordinate where the boxes are disjoint
// collapses to the nearest endpoint of `a` (callers clip framers against the
// operating box; a disjoint coordinate means containment is already lost and
// a valid box is still required downstream).
IntervalVector intersect(const IntervalVector& a, const IntervalVector& b);

// Elementwise sign split of a matrix: pos = max(M, 0), neg = pos - M.
struct MatrixSplit {
  MatrixXd pos;
  MatrixXd neg;
  MatrixXd abs() const { return pos + neg; }
};

// pos - neg reconstructs M exactly; both parts nonnegative.
MatrixSplit split(const MatrixXd& M);

// True iff all off-diagonal entries of M are >= -tol.
bool is_metzler(const MatrixXd& M, double tol = 0.0);

// Tight bounds on { A z : z in x }: [A+ lo - A- hi, A+ hi - A- lo].
IntervalVector bound_linear_map(const MatrixXd& A, const IntervalVector& x);
IntervalVector bound_linear_map(const MatrixSplit& A, const IntervalVector& x);

// Entrywise bounds on { A J : J in [J_lo, J_hi] } for constant A.
std::pair<MatrixXd, MatrixXd> bound_matrix_product(const MatrixXd& A,
                                                   const MatrixXd& J_lo,
                                                   const MatrixXd& J_hi);

}  // namespace riobs
