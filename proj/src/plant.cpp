#include "riobs/plant.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "riobs/util.hpp"

namespace riobs {

namespace {

// Index of the peak entry when the column is numerically a standard basis
// vector with a +1 peak, else -1.
Eigen::Index basis_index(const Eigen::Ref<const VectorXd>& c) {
  Eigen::Index imax = 0;
  c.cwiseAbs().maxCoeff(&imax);
  if (std::abs(c(imax) - 1.0) > 1e-9) return -1;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (i != imax && std::abs(c(i)) > 1e-9) return -1;
  return imax;
}

MatrixXd basis_completion(Eigen::Index dim, const std::vector<bool>& used) {
  Eigen::Index free_count = 0;
  for (bool u : used)
    if (!u) ++free_count;
  MatrixXd out = MatrixXd::Zero(dim, free_count);
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (!used[i]) out(i, j++) = 1.0;
  return out;
}

// Returns true and snaps U1 columns to exact basis vectors, filling U2 with
// the complementary identity columns, when U1 is a signed partial
// permutation. Keeps entries exact so downstream products stay sparse.
bool try_basis_split(MatrixXd& U1, MatrixXd& U2) {
  const Eigen::Index dim = U1.rows();
  std::vector<bool> used(static_cast<size_t>(dim), false);
  std::vector<Eigen::Index> idx(static_cast<size_t>(U1.cols()));
  for (Eigen::Index j = 0; j < U1.cols(); ++j) {
    const Eigen::Index i = basis_index(U1.col(j));
    if (i < 0 || used[static_cast<size_t>(i)]) return false;
    used[static_cast<size_t>(i)] = true;
    idx[static_cast<size_t>(j)] = i;
  }
  U1.setZero();
  for (Eigen::Index j = 0; j < U1.cols(); ++j)
    U1(idx[static_cast<size_t>(j)], j) = 1.0;
  U2 = basis_completion(dim, used);
  return true;
}

MatrixXd pseudo_inverse_full_col(const MatrixXd& M, const char* what) {
  if (M.cols() == 0) return MatrixXd::Zero(0, M.rows());
  const std::string fail =
      std::string(what) +
      " lacks full column rank: the attack-free outputs cannot isolate the "
      "attack channels that bypass the output split";
  if (M.rows() < M.cols()) throw ConfigError(fail);
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd sv = svd.singularValues();
  const double smax = sv(0);
  if (smax == 0.0 || sv(sv.size() - 1) <= 1e-10 * smax) throw ConfigError(fail);
  return svd.matrixV() * sv.cwiseInverse().asDiagonal() *
         svd.matrixU().transpose();
}

DifferentiableMap left_multiply(const MatrixXd& T, const DifferentiableMap& m) {
  DifferentiableMap r;
  r.eval = [T, f = m.eval](const VectorXd& x) -> VectorXd { return T * f(x); };
  std::tie(r.jac_lo, r.jac_hi) = bound_matrix_product(T, m.jac_lo, m.jac_hi);
  r.domain = m.domain;
  return r;
}

}  // namespace

AttackDecomposition decompose_attack_matrix(const MatrixXd& H,
                                            double rank_tol) {
  AttackDecomposition ad;
  const Eigen::Index l = H.rows(), p = H.cols();
  auto zero_rank = [&]() {
    ad.p_H = 0;
    ad.U1 = MatrixXd::Zero(l, 0);
    ad.E1 = MatrixXd::Zero(p, 0);
    ad.Xi = MatrixXd::Zero(0, 0);
    ad.S = ad.Xi;
    ad.U2 = MatrixXd::Identity(l, l);
    ad.E2 = MatrixXd::Identity(p, p);
    ad.T1 = ad.U1.transpose();
    ad.T2 = ad.U2.transpose();
    return ad;
  };
  if (H.size() == 0 || H.cwiseAbs().maxCoeff() == 0.0) return zero_rank();

  Eigen::JacobiSVD<MatrixXd> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd sv = svd.singularValues();
  const double smax = sv(0);
  const double tol = rank_tol < 0.0 ? 1e-10 * smax : rank_tol;
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > tol) ++r;
  if (r == 0) return zero_rank();

  ad.p_H = r;
  ad.U1 = svd.matrixU().leftCols(r);
  ad.E1 = svd.matrixV().leftCols(r);
  // Fix the joint column signs so a permutation-like U1 ends up nonnegative.
  for (Eigen::Index j = 0; j < r; ++j) {
    Eigen::Index imax = 0;
    ad.U1.col(j).cwiseAbs().maxCoeff(&imax);
    if (ad.U1(imax, j) < 0.0) {
      ad.U1.col(j) *= -1.0;
      ad.E1.col(j) *= -1.0;
    }
  }

  const bool u_snap = try_basis_split(ad.U1, ad.U2);
  if (!u_snap) ad.U2 = svd.matrixU().rightCols(l - r);
  const bool e_snap = try_basis_split(ad.E1, ad.E2);
  if (!e_snap) ad.E2 = svd.matrixV().rightCols(p - r);

  ad.Xi = MatrixXd(sv.head(r).asDiagonal());
  if (u_snap && e_snap) {
    // With both factors snapped the middle factor is read off H exactly.
    const MatrixXd probe = ad.U1.transpose() * H * ad.E1;
    MatrixXd off = probe;
    off.diagonal().setZero();
    bool ok = off.cwiseAbs().maxCoeff() <= 1e-9 * smax;
    for (Eigen::Index j = 0; ok && j < r; ++j)
      ok = probe(j, j) > tol && std::abs(probe(j, j) - sv(j)) <= 1e-9 * smax;
    if (ok) {
      ad.Xi = MatrixXd::Zero(r, r);
      ad.Xi.diagonal() = probe.diagonal();
    }
  }
  ad.S = MatrixXd::Zero(r, r);
  ad.S.diagonal() = ad.Xi.diagonal().cwiseInverse();
  ad.T1 = ad.U1.transpose();
  ad.T2 = ad.U2.transpose();
  return ad;
}

TransformedPlant transform_plant(const PlantModel& plant,
                                 const VectorXd& abstraction_sigma) {
  TransformedPlant tp;
  tp.plant = plant;
  const Eigen::Index n = plant.f.out_dim();
  const Eigen::Index l = plant.h.out_dim();
  const Eigen::Index p = plant.G.cols();
  tp.n = n;
  tp.l = l;
  tp.p = p;

  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(n > 0, "plant has no states");
  require(l > 0, "plant has no measurements");
  require(plant.f.in_dim() == n, "state map must be square");
  require(plant.h.in_dim() == n, "output map input dimension mismatch");
  require(plant.W.rows() == n, "process noise matrix row count mismatch");
  require(plant.V.rows() == l, "measurement noise matrix row count mismatch");
  require(plant.G.rows() == n, "actuator attack matrix row count mismatch");
  require(plant.H.rows() == l && plant.H.cols() == p,
          "attack matrices must share a column count");
  require(plant.noise_w.size() == plant.W.cols(),
          "process noise box size mismatch");
  require(plant.noise_v.size() == plant.V.cols(),
          "measurement noise box size mismatch");
  require(plant.x0.size() == n && plant.box.size() == n,
          "state box size mismatch");
  require(plant.box.valid() && plant.box.lo.allFinite() &&
              plant.box.hi.allFinite(),
          "operating box must be bounded with lo <= hi");
  require(plant.x0.valid(), "initial box must have lo <= hi");
  require(plant.box.contains(plant.x0, 0.0),
          "initial box must lie inside the operating box");
  require(plant.noise_w.valid() && plant.noise_v.valid(),
          "noise boxes must have lo <= hi");
  require(plant.W.allFinite() && plant.V.allFinite() &&
              plant.G.allFinite() && plant.H.allFinite(),
          "plant matrices must be finite");

  tp.ad = decompose_attack_matrix(plant.H);
  tp.m2 = l - tp.ad.p_H;

  tp.h1 = left_multiply(tp.ad.T1, plant.h);
  tp.h2 = left_multiply(tp.ad.T2, plant.h);
  tp.h1.domain = plant.box;
  tp.h2.domain = plant.box;
  tp.V1 = tp.ad.T1 * plant.V;
  tp.V2 = tp.ad.T2 * plant.V;
  tp.G1 = plant.G * tp.ad.E1;
  tp.G2 = plant.G * tp.ad.E2;

  tp.psi2 = jss_decompose(tp.h2, SlopePolicy::Upper);
  tp.C2 = tp.psi2.H;
  tp.psi2_zero = tp.psi2.mu.jac_lo.size() == 0 ||
                 ((tp.psi2.mu.jac_lo.array() == 0.0).all() &&
                  (tp.psi2.mu.jac_hi.array() == 0.0).all());

  tp.M2 = pseudo_inverse_full_col(tp.C2 * tp.G2, "attack-to-output coupling");
  tp.N = tp.G2 * tp.M2;

  if (tp.psi2_zero) {
    // Affine output remainder; the averaged map is the identity shifted by a
    // constant, so no optimization is needed.
    tp.A_g = MatrixXd::Identity(n, n);
    tp.Lambda = tp.A_g;
    VectorXd b = tp.m2 > 0 ? VectorXd(tp.psi2.mu.eval(plant.box.mid()))
                           : VectorXd::Zero(0);
    VectorXd shift = tp.N * b;
    tp.eps = IntervalVector(shift, shift);
    tp.g_abs.A_over = tp.A_g;
    tp.g_abs.A_under = tp.A_g;
    tp.g_abs.e_over = shift;
    tp.g_abs.e_under = shift;
    tp.g_abs.theta = 0.0;
    tp.g_abs.sigma = VectorXd::Zero(n);
    tp.g_abs.A_g = tp.A_g;
    tp.g_abs.eps = tp.eps;
    tp.g_abs.box = plant.box;
  } else {
    if (abstraction_sigma.size() != n)
      throw std::invalid_argument(
          "abstraction_sigma of state dimension is required when the "
          "attack-free output remainder is nonlinear");
    DifferentiableMap g;
    const MatrixXd N = tp.N;
    auto mu_eval = tp.psi2.mu.eval;
    g.eval = [N, mu_eval](const VectorXd& x) -> VectorXd {
      return x + N * mu_eval(x);
    };
    auto [jlo, jhi] =
        bound_matrix_product(N, tp.psi2.mu.jac_lo, tp.psi2.mu.jac_hi);
    g.jac_lo = MatrixXd::Identity(n, n) + jlo;
    g.jac_hi = MatrixXd::Identity(n, n) + jhi;
    g.domain = plant.box;
    tp.g_abs = affine_outer_approx(g, plant.box, abstraction_sigma);
    tp.A_g = tp.g_abs.A_g;
    tp.eps = tp.g_abs.eps;
    Eigen::JacobiSVD<MatrixXd> svd(tp.A_g);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(n - 1);
    if (smin <= 0.0 || smax / smin > 1e12)
      throw ConfigError(
          "averaged state map is numerically singular on the operating box");
    tp.Lambda = tp.A_g.inverse();
  }

  const MatrixXd Mo =
      tp.Lambda * (MatrixXd::Identity(n, n) - tp.N * tp.C2);
  const MatrixXd K = tp.G1 * tp.ad.S * tp.ad.T1;
  {
    DifferentiableMap ft;
    auto fe = plant.f.eval;
    auto he = plant.h.eval;
    ft.eval = [Mo, K, fe, he](const VectorXd& x) -> VectorXd {
      return Mo * (fe(x) - K * he(x));
    };
    auto [klo, khi] = bound_matrix_product(-K, plant.h.jac_lo, plant.h.jac_hi);
    const MatrixXd inner_lo = plant.f.jac_lo + klo;
    const MatrixXd inner_hi = plant.f.jac_hi + khi;
    std::tie(ft.jac_lo, ft.jac_hi) =
        bound_matrix_product(Mo, inner_lo, inner_hi);
    ft.domain = plant.box;
    tp.rho = jss_decompose(ft, SlopePolicy::Upper);
    tp.A = tp.rho.H;
  }

  tp.Phi = tp.ad.E2 * tp.M2 * tp.C2;
  tp.A_v = (tp.Phi * tp.G1 - tp.ad.E1) * tp.ad.S * tp.V1;
  tp.A_z = (tp.ad.E1 - tp.Phi * tp.G1) * tp.ad.S;
  tp.W_hat = Mo * plant.W;
  {
    DifferentiableMap km;
    const MatrixXd Mh = (tp.Phi * tp.G1 - tp.ad.E1) * tp.ad.S * tp.ad.T1;
    const MatrixXd Mf = -tp.Phi;
    auto fe = plant.f.eval;
    auto he = plant.h.eval;
    km.eval = [Mh, Mf, fe, he](const VectorXd& x) -> VectorXd {
      return Mh * he(x) + Mf * fe(x);
    };
    auto [hlo, hhi] = bound_matrix_product(Mh, plant.h.jac_lo, plant.h.jac_hi);
    auto [flo, fhi] = bound_matrix_product(Mf, plant.f.jac_lo, plant.f.jac_hi);
    km.jac_lo = hlo + flo;
    km.jac_hi = hhi + fhi;
    km.domain = plant.box;
    tp.kappa = jss_decompose(km, SlopePolicy::Upper);
  }
  return tp;
}

VectorXd reconstruct_d1(const TransformedPlant& tp, const VectorXd& z1,
                        const VectorXd& x, const VectorXd& v) {
  if (tp.ad.p_H == 0) return VectorXd::Zero(0);
  return tp.ad.S * (z1 - tp.h1.eval(x) - tp.V1 * v);
}

}  // namespace riobs
