#include <doctest.h>

#include "riobs/conic.hpp"

using namespace riobs;

TEST_CASE("scalar halfline program") {
  ConeProgram p;
  p.nvar = 1;
  p.c = VectorXd::Ones(1);
  p.G = MatrixXd::Ones(1, 1);
  p.h = -VectorXd::Ones(1);  // x - 1 >= 0
  ConeSolution s = solve_cone(p);
  REQUIRE(s.feasible);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.gap_bound <= 1e-7);
}

TEST_CASE("simplex corner") {
  ConeProgram p;
  p.nvar = 2;
  p.c = (VectorXd(2) << 1.0, 2.0).finished();
  p.G = MatrixXd(3, 2);
  p.G << 1, 0, 0, 1, 1, 1;
  p.h = (VectorXd(3) << 0, 0, -1).finished();  // x, y >= 0, x + y >= 1
  ConeSolution s = solve_cone(p);
  REQUIRE(s.feasible);
  CHECK(s.obj == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(s.x(1) == doctest::Approx(0.0).epsilon(2e-5));
}

TEST_CASE("matrix block bound") {
  // minimize t with [t 1; 1 t] psd: optimum 1
  ConeProgram p;
  p.nvar = 1;
  p.c = VectorXd::Ones(1);
  MatBlock b;
  b.dim = 2;
  b.F0 = (MatrixXd(2, 2) << 0, 1, 1, 0).finished();
  b.entries.push_back({0, 0, 0, 1.0});
  b.entries.push_back({0, 1, 1, 1.0});
  p.blocks.push_back(b);
  p.G = MatrixXd::Zero(0, 1);
  p.h = VectorXd::Zero(0);
  ConeSolution s = solve_cone(p);
  REQUIRE(s.feasible);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("conflicting rows reported infeasible") {
  ConeProgram p;
  p.nvar = 1;
  p.c = VectorXd::Zero(1);
  p.G = MatrixXd(2, 1);
  p.G << 1, -1;
  p.h = (VectorXd(2) << -1.0, 0.0).finished();  // x >= 1 and x <= 0
  ConeSolution s = solve_cone(p);
  CHECK_FALSE(s.feasible);
  CHECK(s.infeas_margin > 0.0);
}

TEST_CASE("warm start accepted") {
  ConeProgram p;
  p.nvar = 1;
  p.c = VectorXd::Ones(1);
  p.G = MatrixXd::Ones(1, 1);
  p.h = -VectorXd::Ones(1);
  VectorXd x0 = VectorXd::Constant(1, 5.0);  // strictly feasible start
  ConeSolution s = solve_cone(p, {}, &x0);
  REQUIRE(s.feasible);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("off diagonal entries enter symmetrically") {
  // minimize t with [1 x; x 1] psd and x = t: boundary at |x| <= 1, so
  // minimizing t drives x to -1
  ConeProgram p;
  p.nvar = 1;
  p.c = VectorXd::Ones(1);
  MatBlock b;
  b.dim = 2;
  b.F0 = MatrixXd::Identity(2, 2);
  b.entries.push_back({0, 0, 1, 1.0});
  p.blocks.push_back(b);
  p.G = MatrixXd::Zero(0, 1);
  p.h = VectorXd::Zero(0);
  ConeSolution s = solve_cone(p);
  REQUIRE(s.feasible);
  CHECK(s.x(0) == doctest::Approx(-1.0).epsilon(1e-5));
}
