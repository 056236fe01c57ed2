#include "riobs/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>

#include "riobs/util.hpp"

namespace riobs {

namespace {

struct BlockWork {
  int dim = 0;
  MatrixXd F0;
  std::vector<std::vector<MatBlockEntry>> byvar;
  std::vector<int> vars;

  MatrixXd value(const VectorXd& x) const {
    MatrixXd S = F0;
    for (int q : vars)
      for (const auto& e : byvar[static_cast<size_t>(q)]) {
        S(e.r, e.c) += x(q) * e.v;
        if (e.r != e.c) S(e.c, e.r) += x(q) * e.v;
      }
    return S;
  }

  MatrixXd coeff(int q) const {
    MatrixXd F = MatrixXd::Zero(dim, dim);
    for (const auto& e : byvar[static_cast<size_t>(q)]) {
      F(e.r, e.c) += e.v;
      if (e.r != e.c) F(e.c, e.r) += e.v;
    }
    return F;
  }
};

class Barrier {
 public:
  Barrier(const ConeProgram& prob) : prob_(prob) {
    for (const auto& blk : prob.blocks) {
      BlockWork w;
      w.dim = blk.dim;
      w.F0 = blk.F0;
      w.byvar.resize(static_cast<size_t>(prob.nvar));
      for (const auto& e : blk.entries)
        w.byvar[static_cast<size_t>(e.var)].push_back(e);
      for (int q = 0; q < prob.nvar; ++q)
        if (!w.byvar[static_cast<size_t>(q)].empty()) w.vars.push_back(q);
      blocks_.push_back(std::move(w));
      m_ += blk.dim;
    }
    m_ += static_cast<int>(prob.G.rows());
  }

  int complexity() const { return m_; }

  bool strictly_feasible(const VectorXd& x) const {
    if (prob_.G.rows() > 0) {
      VectorXd s = prob_.G * x + prob_.h;
      if (!(s.array() > 0.0).all()) return false;
    }
    for (const auto& b : blocks_) {
      Eigen::LLT<MatrixXd> llt(b.value(x));
      if (llt.info() != Eigen::Success) return false;
    }
    return true;
  }

  // Barrier value; returns false when x is not strictly feasible.
  bool phi(const VectorXd& x, double* out) const {
    double v = 0.0;
    if (prob_.G.rows() > 0) {
      VectorXd s = prob_.G * x + prob_.h;
      if (!(s.array() > 0.0).all()) return false;
      v -= s.array().log().sum();
    }
    for (const auto& b : blocks_) {
      Eigen::LLT<MatrixXd> llt(b.value(x));
      if (llt.info() != Eigen::Success) return false;
      v -= 2.0 * MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    }
    *out = v;
    return true;
  }

  // Gradient and Hessian of the barrier at a strictly feasible x.
  void derivatives(const VectorXd& x, VectorXd* g, MatrixXd* H) const {
    const int nv = prob_.nvar;
    *g = VectorXd::Zero(nv);
    *H = MatrixXd::Zero(nv, nv);
    if (prob_.G.rows() > 0) {
      VectorXd s = prob_.G * x + prob_.h;
      VectorXd inv = s.cwiseInverse();
      *g -= prob_.G.transpose() * inv;
      *H += prob_.G.transpose() * inv.array().square().matrix().asDiagonal() *
            prob_.G;
    }
    for (const auto& b : blocks_) {
      Eigen::LLT<MatrixXd> llt(b.value(x));
      if (llt.info() != Eigen::Success)
        throw SolverError("barrier derivatives at infeasible point");
      MatrixXd L = llt.matrixL();
      const size_t nb = b.vars.size();
      std::vector<MatrixXd> V(nb);
      for (size_t a = 0; a < nb; ++a) {
        MatrixXd Y = b.coeff(b.vars[a]);
        L.triangularView<Eigen::Lower>().solveInPlace(Y);  // L^-1 F
        MatrixXd Yt = Y.transpose();
        L.triangularView<Eigen::Lower>().solveInPlace(Yt);  // L^-1 F L^-T
        V[a] = Yt;
        (*g)(b.vars[a]) -= V[a].trace();
      }
      for (size_t a = 0; a < nb; ++a)
        for (size_t c = a; c < nb; ++c) {
          double hac = V[a].cwiseProduct(V[c].transpose()).sum();
          (*H)(b.vars[a], b.vars[c]) += hac;
          if (a != c) (*H)(b.vars[c], b.vars[a]) += hac;
        }
    }
  }

  // Largest step along dx (up to cap) keeping scalar rows positive.
  double max_row_step(const VectorXd& x, const VectorXd& dx, double cap) const {
    double a = cap;
    if (prob_.G.rows() > 0) {
      VectorXd s = prob_.G * x + prob_.h;
      VectorXd ds = prob_.G * dx;
      for (Eigen::Index r = 0; r < s.size(); ++r)
        if (ds(r) < 0.0) a = std::min(a, -s(r) / ds(r));
    }
    return a;
  }

 private:
  const ConeProgram& prob_;
  std::vector<BlockWork> blocks_;
  int m_ = 0;
};

bool trace_enabled() {
  static const bool on = std::getenv("RIOBS_CONE_TRACE") != nullptr;
  return on;
}

// Newton centering of t*c'x + phi(x). The Hessian mixes O(1) slacks with
// the deliberately tiny strictness windows of the synthesis problems, so the
// system is Jacobi-equilibrated before factorization.
int center(const Barrier& bar, const ConeProgram& prob, double t, VectorXd& x,
           const ConeSolveOptions& opts,
           const std::function<bool(const VectorXd&)>& stop_early,
           bool* reached = nullptr) {
  int used = 0;
  if (reached) *reached = false;
  for (; used < opts.max_center_iters; ++used) {
    if (stop_early && stop_early(x)) return used;

    VectorXd g;
    MatrixXd H;
    bar.derivatives(x, &g, &H);
    g += t * prob.c;

    VectorXd d = H.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    MatrixXd Hs = d.asDiagonal() * H * d.asDiagonal();
    VectorXd gs = d.asDiagonal() * g;

    VectorXd dy;
    double ridge = 1e-13;
    for (;;) {
      MatrixXd Hr = Hs;
      Hr.diagonal().array() += ridge;
      Eigen::LDLT<MatrixXd> ldlt(Hr);
      dy = ldlt.solve(-gs);
      if (dy.allFinite() && gs.dot(dy) < 0.0) break;
      ridge *= 100.0;
      if (ridge > 1e6) throw SolverError("centering: singular Newton system");
    }
    VectorXd dx = d.asDiagonal() * dy;

    double lambda2 = -g.dot(dx);
    double phi0;
    if (!bar.phi(x, &phi0)) throw SolverError("centering left the cone");
    double f0 = t * prob.c.dot(x) + phi0;
    if (lambda2 * 0.5 <= 1e-10 * (1.0 + std::abs(f0))) {
      if (reached) *reached = true;
      return used;
    }

    double alpha = 0.99 * bar.max_row_step(x, dx, 1.0101);
    alpha = std::min(alpha, 1.0);
    double fnew = 0.0;
    bool ok = false;
    for (int ls = 0; ls < 120; ++ls) {
      VectorXd xn = x + alpha * dx;
      double phin;
      if (bar.phi(xn, &phin)) {
        fnew = t * prob.c.dot(xn) + phin;
        if (fnew <= f0 + 0.25 * alpha * g.dot(dx)) {
          x = xn;
          ok = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (trace_enabled() && used % 25 == 0)
      std::fprintf(stderr,
                   "cone:   iter=%d lambda2=%.3g alpha=%.3g f=%.9g ok=%d\n",
                   used, lambda2, alpha, f0, ok ? 1 : 0);
    if (!ok) return used;  // stalled at numeric resolution: accept the center
  }
  return used;
}

}  // namespace

ConeSolution solve_cone(const ConeProgram& prob, const ConeSolveOptions& opts,
                        const VectorXd* x_init) {
  if (prob.c.size() != prob.nvar)
    throw std::invalid_argument("solve_cone: objective size mismatch");

  ConeSolution sol;
  VectorXd x = x_init ? *x_init : VectorXd::Zero(prob.nvar);
  Barrier bar(prob);

  // Phase 1: shift every constraint by a common slack variable s and push s
  // negative; any iterate whose x-part is strictly feasible ends the phase.
  if (!bar.strictly_feasible(x)) {
    ConeProgram aug;
    const int sv = prob.nvar;
    aug.nvar = prob.nvar + 1;
    aug.c = VectorXd::Zero(aug.nvar);
    aug.c(sv) = 1.0;

    double viol = 0.0;
    if (prob.G.rows() > 0) {
      VectorXd s0 = prob.G * x + prob.h;
      viol = std::max(viol, -s0.minCoeff());
    }
    for (const auto& blk : prob.blocks) {
      MatrixXd S = blk.F0;
      for (const auto& e : blk.entries) {
        S(e.r, e.c) += x(e.var) * e.v;
        if (e.r != e.c) S(e.c, e.r) += x(e.var) * e.v;
      }
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(S,
                                                 Eigen::EigenvaluesOnly);
      viol = std::max(viol, -es.eigenvalues().minCoeff());
    }
    const double cap = viol + 2.0;

    // Rows: shifted originals, s >= -cap, and s <= viol + 2. Without the
    // upper cap the barrier inflates s toward the analytic center instead
    // of reducing the violation.
    aug.G.resize(prob.G.rows() + 2, aug.nvar);
    aug.G.setZero();
    if (prob.G.rows() > 0) aug.G.topLeftCorner(prob.G.rows(), prob.nvar) = prob.G;
    aug.G.col(sv).setOnes();
    aug.G(prob.G.rows() + 1, sv) = -1.0;
    aug.h.resize(prob.h.size() + 2);
    aug.h.head(prob.h.size()) = prob.h;
    aug.h(prob.h.size()) = cap;      // s >= -cap keeps phase 1 bounded
    aug.h(prob.h.size() + 1) = viol + 2.0;

    aug.blocks = prob.blocks;
    for (auto& blk : aug.blocks)
      for (int i = 0; i < blk.dim; ++i) blk.entries.push_back({sv, i, i, 1.0});

    Barrier bar1(aug);
    VectorXd y(aug.nvar);
    y.head(prob.nvar) = x;
    y(sv) = viol + 1.0;

    std::function<bool(const VectorXd&)> exit_check =
        [&](const VectorXd& yy) -> bool {
      return bar.strictly_feasible(yy.head(prob.nvar));
    };

    double t = 1.0;
    bool found = false;
    for (int outer = 0; outer < 80 && sol.iters < opts.max_total_iters;
         ++outer) {
      bool reached = false;
      int used = center(bar1, aug, t, y, opts, exit_check, &reached);
      sol.iters += used;
      if (trace_enabled())
        std::fprintf(stderr,
                     "cone: phase1 outer=%d t=%.3g s=%.6g used=%d reached=%d\n",
                     outer, t, y(sv), used, reached ? 1 : 0);
      if (bar.strictly_feasible(y.head(prob.nvar))) {
        found = true;
        break;
      }
      double gap = bar1.complexity() / t;
      double s = y(sv);
      // The gap bound certifies min s >= s - gap only at a converged
      // center, so never declare infeasibility off a stalled one.
      if (reached && s - gap > -opts.infeas_tol) {
        sol.feasible = false;
        sol.infeas_margin = s - gap;
        sol.x = y.head(prob.nvar);
        return sol;
      }
      t *= opts.mu_update;
    }
    if (!found) {
      sol.feasible = false;
      sol.infeas_margin = y(sv);
      sol.x = y.head(prob.nvar);
      return sol;
    }
    x = y.head(prob.nvar);
  }

  // Phase 2: follow the central path of the true objective.
  sol.feasible = true;
  double t = 1.0;
  const double m = bar.complexity();
  for (int outer = 0; outer < 80 && sol.iters < opts.max_total_iters; ++outer) {
    int used = center(bar, prob, t, x, opts, nullptr);
    sol.iters += used;
    sol.gap_bound = m / t;
    if (trace_enabled())
      std::fprintf(stderr, "cone: phase2 outer=%d t=%.3g obj=%.6g used=%d\n",
                   outer, t, prob.c.dot(x), used);
    if (sol.gap_bound <= opts.gap_tol) break;
    t *= opts.mu_update;
  }
  sol.x = x;
  sol.obj = prob.c.dot(x);
  return sol;
}

}  // namespace riobs
