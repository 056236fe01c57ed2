#pragma once

#include <vector>

#include "riobs/decomposition.hpp"
#include "riobs/interval.hpp"

namespace riobs {

// Parallel affine outer approximation of g over a box:
//   A_under x + e_under  <=  g(x)  <=  A_over x + e_over   on the box,
// collapsed to the band  g(x) - A_g x  in  [eps.lo, eps.hi]  with
// A_g = (A_over + A_under)/2 and eps.hi - eps.lo = theta * 1.
struct AffineAbstraction {
  MatrixXd A_over;
  MatrixXd A_under;
  VectorXd e_over;
  VectorXd e_under;
  double theta = 0.0;
  VectorXd sigma;
  MatrixXd A_g;
  IntervalVector eps;
  IntervalVector box;
};

// All vertices of the box in lexicographic order; coordinates of zero width
// contribute a single value, so a degenerate box yields one point. Guarded
// to n <= 20.
std::vector<VectorXd> box_vertices(const IntervalVector& box);

// Interior-deviation slack sigma_i = (M/2) r^2, r half the box diagonal,
// valid whenever M bounds the spectral norm of every component Hessian of
// the target map over the box.
VectorXd sigma_bound(double hessian_norm_bound, const IntervalVector& box,
                     Eigen::Index out_dim);

// Vertex linear program: minimize theta subject to, at every vertex x_s,
//   A_under x_s + e_under + sigma <= g(x_s) <= A_over x_s + e_over - sigma
//   (A_over - A_under) x_s + e_over - e_under <= theta 1
// then parallelize per the band construction above.
AffineAbstraction affine_outer_approx(const DifferentiableMap& g,
                                      const IntervalVector& box,
                                      const VectorXd& sigma);

}  // namespace riobs
