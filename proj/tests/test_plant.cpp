#include <doctest.h>

#include "riobs/config.hpp"
#include "riobs/plant.hpp"
#include "riobs/power_system.hpp"

using namespace riobs;

namespace {

const TransformedPlant& bench() {
  static TransformedPlant tp =
      transform_plant(build_power_plant(default_scenario().ps).plant);
  return tp;
}

}  // namespace

TEST_CASE("measurement attack directions split cleanly") {
  const TransformedPlant& tp = bench();
  const AttackDecomposition& ad = tp.ad;
  CHECK(ad.p_H == 1);
  CHECK(tp.m2 == 5);
  CHECK(tp.n == 6);
  CHECK(tp.p == 2);
  // T stacks to an orthonormal frame: y is recovered from its two halves
  MatrixXd U(6, 6);
  U << ad.U1, ad.U2;
  CHECK((U.transpose() * U).isIdentity(1e-12));
  CHECK((ad.T1 * ad.U1).isIdentity(1e-12));
  CHECK((ad.T2 * ad.U2).isIdentity(1e-12));
  CHECK((ad.T1 * ad.U2).isZero(1e-12));
  CHECK((ad.Xi * ad.S).isIdentity(1e-12));
  // the factorization reproduces the attack injection map
  CHECK((ad.U1 * ad.Xi * ad.E1.transpose() -
         bench().plant.H)
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}

TEST_CASE("degenerate and full rank attack maps") {
  MatrixXd H0 = MatrixXd::Zero(4, 2);
  AttackDecomposition a0 = decompose_attack_matrix(H0);
  CHECK(a0.p_H == 0);
  CHECK(a0.U2.cols() == 4);
  MatrixXd H1 = MatrixXd::Identity(3, 3);
  AttackDecomposition a1 = decompose_attack_matrix(H1);
  CHECK(a1.p_H == 3);
  CHECK(a1.U2.cols() == 0);
}

TEST_CASE("state transform identities") {
  const TransformedPlant& tp = bench();
  const Eigen::Index n = tp.n;
  // the unknown sensor channel is cancelled from the state update
  CHECK(((MatrixXd::Identity(n, n) - tp.N * tp.C2) * tp.G2).isZero(1e-10));
  // benchmark has no actuator component through the attacked output
  CHECK(tp.G1.isZero(1e-12));
  // with a linear attack-free output map the band is degenerate
  CHECK(tp.psi2_zero);
  CHECK(tp.eps.width().maxCoeff() == 0.0);
  CHECK(tp.Lambda.isIdentity(1e-10));
  // recombination: Lambda (I - N C2) + Lambda N C2 = I
  CHECK((tp.Lambda * (MatrixXd::Identity(n, n) - tp.N * tp.C2) +
         tp.Lambda * tp.N * tp.C2)
            .isIdentity(1e-10));
}

TEST_CASE("sensor attack reconstruction is exact on clean data") {
  const TransformedPlant& tp = bench();
  ScenarioConfig sc = default_scenario();
  SimResult sim = simulate_plant(tp, sc.attack, 600, 4);
  double worst = 0.0;
  for (size_t k = 0; k < sim.x.size(); ++k) {
    VectorXd rec = reconstruct_d1(tp, sim.z1[k], sim.x[k], sim.v[k]);
    REQUIRE(rec.size() == 1);
    const double truth = (tp.ad.E1.transpose() * sim.d[k])(0);
    worst = std::max(worst, std::abs(rec(0) - truth));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("output split carries all information") {
  const TransformedPlant& tp = bench();
  ScenarioConfig sc = default_scenario();
  SimResult sim = simulate_plant(tp, sc.attack, 50, 9);
  for (size_t k = 0; k < sim.y.size(); ++k) {
    VectorXd back = tp.ad.U1 * sim.z1[k] + tp.ad.U2 * sim.z2[k];
    CHECK((back - sim.y[k]).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("linear part matches the euler step on angles") {
  const TransformedPlant& tp = bench();
  ScenarioConfig sc = default_scenario();
  const double dt = sc.ps.dt;
  MatrixXd row0(1, 6), row2(1, 6);
  row0 << 1, dt, 0, 0, 0, 0;
  row2 << 0, 0, 1, dt, 0, 0;
  CHECK(tp.A.row(0).isApprox(row0.row(0), 1e-12));
  CHECK(tp.A.row(2).isApprox(row2.row(0), 1e-12));
  // angle rows are exactly linear: remainder vanishes there
  VectorXd z = tp.plant.box.mid();
  CHECK(std::abs(tp.rho.mu.eval(z)(0)) <= 1e-12);
  CHECK(std::abs(tp.rho.mu.eval(z)(2)) <= 1e-12);
  CHECK(std::abs(tp.rho.mu.eval(z)(4)) <= 1e-12);
}
