#include <doctest.h>

#include "riobs/abstraction.hpp"
#include "riobs/rng.hpp"

using namespace riobs;

TEST_CASE("vertex enumeration handles flat coordinates") {
  VectorXd lo(3), hi(3);
  lo << 0, 1, -2;
  hi << 1, 1, 2;
  auto vs = box_vertices(IntervalVector(lo, hi));
  CHECK(vs.size() == 4);
  for (const VectorXd& v : vs) CHECK(v(1) == 1.0);
}

TEST_CASE("interior slack formula") {
  VectorXd lo(2), hi(2);
  lo << 0, 0;
  hi << 2, 2;
  // half diagonal sqrt(2), curvature bound 3: slack 3
  VectorXd s = sigma_bound(3.0, IntervalVector(lo, hi), 2);
  REQUIRE(s.size() == 2);
  CHECK(s(0) == doctest::Approx(3.0));
  CHECK(s(1) == doctest::Approx(3.0));
}

TEST_CASE("affine maps collapse the band") {
  DifferentiableMap g;
  g.eval = [](const VectorXd& x) {
    return VectorXd(3.0 * x - VectorXd::Constant(1, 1.0));
  };
  g.jac_lo = g.jac_hi = MatrixXd::Constant(1, 1, 3.0);
  g.domain = IntervalVector(VectorXd::Constant(1, -2.0),
                            VectorXd::Constant(1, 5.0));
  AffineAbstraction a = affine_outer_approx(g, g.domain, VectorXd::Zero(1));
  CHECK(a.theta <= 1e-9);
  CHECK(a.A_g(0, 0) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(a.eps.width()(0) <= 1e-9);
}

TEST_CASE("square map band holds on samples") {
  DifferentiableMap g;
  g.eval = [](const VectorXd& x) {
    return VectorXd(x.array().square().matrix());
  };
  g.jac_lo = MatrixXd::Constant(1, 1, -2.0);
  g.jac_hi = MatrixXd::Constant(1, 1, 4.0);
  g.domain = IntervalVector(VectorXd::Constant(1, -1.0),
                            VectorXd::Constant(1, 2.0));
  const VectorXd sigma = sigma_bound(2.0, g.domain, 1);
  AffineAbstraction a = affine_outer_approx(g, g.domain, sigma);
  CHECK(a.theta > 0.0);
  Rng rng(8, 0);
  double margin = 1e300;
  for (int t = 0; t < 2000; ++t) {
    VectorXd x = VectorXd::Constant(1, rng.uniform(-1.0, 2.0));
    const double r = g.eval(x)(0) - (a.A_g * x)(0);
    margin = std::min(margin, r - a.eps.lo(0));
    margin = std::min(margin, a.eps.hi(0) - r);
  }
  CHECK(margin >= -1e-9);
  // the vertex program must also be sharp at the corners themselves
  for (double c : {-1.0, 2.0}) {
    VectorXd x = VectorXd::Constant(1, c);
    const double r = g.eval(x)(0) - (a.A_g * x)(0);
    CHECK(r >= a.eps.lo(0) - 1e-9);
    CHECK(r <= a.eps.hi(0) + 1e-9);
  }
}

TEST_CASE("two dimensional band") {
  // g(x) = (x1 * x2), bilinear on [0,1]^2, curvature norm 1
  DifferentiableMap g;
  g.eval = [](const VectorXd& x) {
    return VectorXd(VectorXd::Constant(1, x(0) * x(1)));
  };
  g.jac_lo = MatrixXd::Zero(1, 2);
  g.jac_hi = MatrixXd::Ones(1, 2);
  g.domain = IntervalVector(VectorXd::Zero(2), VectorXd::Ones(2));
  AffineAbstraction a =
      affine_outer_approx(g, g.domain, sigma_bound(1.0, g.domain, 1));
  Rng rng(8, 1);
  for (int t = 0; t < 2000; ++t) {
    VectorXd x(2);
    x << rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0);
    const double r = g.eval(x)(0) - (a.A_g * x)(0);
    CHECK(r >= a.eps.lo(0) - 1e-9);
    CHECK(r <= a.eps.hi(0) + 1e-9);
  }
}
