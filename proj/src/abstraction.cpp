#include "riobs/abstraction.hpp"

#include <cmath>
#include <stdexcept>

#include "riobs/conic.hpp"
#include "riobs/util.hpp"

namespace riobs {

std::vector<VectorXd> box_vertices(const IntervalVector& box) {
  if (!box.valid()) throw std::invalid_argument("box_vertices: invalid box");
  const Eigen::Index n = box.size();
  std::vector<Eigen::Index> active;  // coordinates with nonzero width
  for (Eigen::Index j = 0; j < n; ++j)
    if (box.hi(j) > box.lo(j)) active.push_back(j);
  if (active.size() > 20)
    throw std::invalid_argument("box_vertices: dimension exceeds the 2^n guard");

  const size_t count = size_t{1} << active.size();
  std::vector<VectorXd> verts;
  verts.reserve(count);
  for (size_t s = 0; s < count; ++s) {
    VectorXd v = box.lo;
    // Lexicographic: the last active coordinate toggles fastest.
    for (size_t a = 0; a < active.size(); ++a) {
      size_t bit = active.size() - 1 - a;
      if (s & (size_t{1} << bit)) v(active[a]) = box.hi(active[a]);
    }
    verts.push_back(std::move(v));
  }
  return verts;
}

VectorXd sigma_bound(double hessian_norm_bound, const IntervalVector& box,
                     Eigen::Index out_dim) {
  if (hessian_norm_bound < 0.0)
    throw std::invalid_argument("sigma_bound: negative curvature bound");
  if (!box.valid()) throw std::invalid_argument("sigma_bound: invalid box");
  double r = 0.5 * box.width().norm();
  return VectorXd::Constant(out_dim, 0.5 * hessian_norm_bound * r * r);
}

AffineAbstraction affine_outer_approx(const DifferentiableMap& g,
                                      const IntervalVector& box,
                                      const VectorXd& sigma) {
  const auto verts = box_vertices(box);
  const Eigen::Index n = box.size();

  std::vector<VectorXd> gv;
  gv.reserve(verts.size());
  for (const auto& v : verts) {
    VectorXd y = g.eval(v);
    if (!y.allFinite())
      throw std::invalid_argument("affine_outer_approx: non-finite map value");
    gv.push_back(std::move(y));
  }
  const Eigen::Index m = gv.front().size();
  if (sigma.size() != m)
    throw std::invalid_argument("affine_outer_approx: sigma size mismatch");
  if ((sigma.array() < 0.0).any())
    throw std::invalid_argument("affine_outer_approx: negative sigma");

  // Variables: per output row i the block [A_under_i, A_over_i, e_under_i,
  // e_over_i], then theta last.
  const int per = static_cast<int>(2 * n + 2);
  const int nvar = static_cast<int>(m) * per + 1;
  const int theta_v = nvar - 1;
  auto au = [&](Eigen::Index i, Eigen::Index j) {
    return static_cast<int>(i) * per + static_cast<int>(j);
  };
  auto ao = [&](Eigen::Index i, Eigen::Index j) {
    return static_cast<int>(i) * per + static_cast<int>(n + j);
  };
  auto eu = [&](Eigen::Index i) {
    return static_cast<int>(i) * per + static_cast<int>(2 * n);
  };
  auto eo = [&](Eigen::Index i) {
    return static_cast<int>(i) * per + static_cast<int>(2 * n + 1);
  };

  ConeProgram lp;
  lp.nvar = nvar;
  lp.c = VectorXd::Zero(nvar);
  lp.c(theta_v) = 1.0;

  const Eigen::Index rows = 3 * m * static_cast<Eigen::Index>(verts.size());
  lp.G = MatrixXd::Zero(rows, nvar);
  lp.h = VectorXd::Zero(rows);
  Eigen::Index r = 0;
  for (size_t s = 0; s < verts.size(); ++s) {
    const VectorXd& xs = verts[s];
    for (Eigen::Index i = 0; i < m; ++i) {
      // g_i(xs) - A_under_i xs - e_under_i - sigma_i >= 0
      for (Eigen::Index j = 0; j < n; ++j) lp.G(r, au(i, j)) = -xs(j);
      lp.G(r, eu(i)) = -1.0;
      lp.h(r) = gv[s](i) - sigma(i);
      ++r;
      // A_over_i xs + e_over_i - sigma_i - g_i(xs) >= 0
      for (Eigen::Index j = 0; j < n; ++j) lp.G(r, ao(i, j)) = xs(j);
      lp.G(r, eo(i)) = 1.0;
      lp.h(r) = -gv[s](i) - sigma(i);
      ++r;
      // theta - (A_over_i - A_under_i) xs - (e_over_i - e_under_i) >= 0
      for (Eigen::Index j = 0; j < n; ++j) {
        lp.G(r, ao(i, j)) = -xs(j);
        lp.G(r, au(i, j)) = xs(j);
      }
      lp.G(r, eo(i)) = -1.0;
      lp.G(r, eu(i)) = 1.0;
      lp.G(r, theta_v) = 1.0;
      ++r;
    }
  }

  ConeSolveOptions opts;
  opts.gap_tol = 1e-9;
  ConeSolution sol = solve_cone(lp, opts);
  if (!sol.feasible)
    throw SolverError("affine_outer_approx: backend reported infeasible");

  AffineAbstraction ab;
  ab.A_over.resize(m, n);
  ab.A_under.resize(m, n);
  ab.e_over.resize(m);
  ab.e_under.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      ab.A_under(i, j) = sol.x(au(i, j));
      ab.A_over(i, j) = sol.x(ao(i, j));
    }
    ab.e_under(i) = sol.x(eu(i));
    ab.e_over(i) = sol.x(eo(i));
  }
  ab.theta = sol.x(theta_v);
  ab.sigma = sigma;
  ab.A_g = 0.5 * (ab.A_over + ab.A_under);
  VectorXd mid = 0.5 * (ab.e_over + ab.e_under);
  VectorXd half = VectorXd::Constant(m, 0.5 * ab.theta);
  ab.eps = IntervalVector(mid - half, mid + half);
  ab.box = box;
  return ab;
}

}  // namespace riobs
