#include "riobs/interval.hpp"

#include <stdexcept>

namespace riobs {

bool IntervalVector::valid() const {
  return lo.size() == hi.size() && (lo.array() <= hi.array()).all();
}

bool IntervalVector::contains(const VectorXd& z, double tol) const {
  if (z.size() != lo.size()) return false;
  return (z.array() >= lo.array() - tol).all() &&
         (z.array() <= hi.array() + tol).all();
}

bool IntervalVector::contains(const IntervalVector& inner, double tol) const {
  if (inner.size() != size()) return false;
  return (inner.lo.array() >= lo.array() - tol).all() &&
         (inner.hi.array() <= hi.array() + tol).all();
}

IntervalVector operator+(const IntervalVector& a, const IntervalVector& b) {
  return {a.lo + b.lo, a.hi + b.hi};
}

IntervalVector intersect(const IntervalVector& a, const IntervalVector& b) {
  VectorXd lo = a.lo.cwiseMax(b.lo);
  VectorXd hi = a.hi.cwiseMin(b.hi);
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (lo(i) > hi(i)) {
      double p = (a.lo(i) > b.hi(i)) ? a.lo(i) : a.hi(i);
      lo(i) = hi(i) = p;
    }
  }
  return {std::move(lo), std::move(hi)};
}

MatrixSplit split(const MatrixXd& M) {
  if (!M.allFinite()) throw std::invalid_argument("split: non-finite matrix");
  MatrixSplit s;
  s.pos = M.cwiseMax(0.0);
  s.neg = s.pos - M;
  return s;
}

bool is_metzler(const MatrixXd& M, double tol) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (i != j && M(i, j) < -tol) return false;
  return true;
}

IntervalVector bound_linear_map(const MatrixXd& A, const IntervalVector& x) {
  if (A.cols() != x.size())
    throw std::invalid_argument("bound_linear_map: dimension mismatch");
  return bound_linear_map(split(A), x);
}

IntervalVector bound_linear_map(const MatrixSplit& A, const IntervalVector& x) {
  return {A.pos * x.lo - A.neg * x.hi, A.pos * x.hi - A.neg * x.lo};
}

std::pair<MatrixXd, MatrixXd> bound_matrix_product(const MatrixXd& A,
                                                   const MatrixXd& J_lo,
                                                   const MatrixXd& J_hi) {
  MatrixSplit s = split(A);
  return {s.pos * J_lo - s.neg * J_hi, s.pos * J_hi - s.neg * J_lo};
}

}  // namespace riobs
