#include <gtest/gtest.h>

#include <cmath>

#include "lq_oracle.hpp"
#include "pnmpc/errors.hpp"
#include "pnmpc/ocp/integrator.hpp"

using namespace pnmpc;
using namespace pnmpc::ocp;

namespace {

const Dynamics kZero = [](VecCRef, VecCRef, VecCRef, VecRef xd) { xd.setZero(); };
const Dynamics kGrowth = [](VecCRef x, VecCRef, VecCRef, VecRef xd) { xd = x; };

Vec v1(double a) { return Vec::Constant(1, a); }

}  // namespace

TEST(IntegrateRk4, ZeroDynamicsLeavesStateUnchanged) {
  Vec x(3);
  x << 1.5, -2.0, 7.25;
  EXPECT_EQ(integrate_rk4(kZero, x, v1(0.3), Vec(), 0.2), x);
}

TEST(IntegrateRk4, ConstantRateIsExact) {
  const Dynamics f = [](VecCRef, VecCRef u, VecCRef, VecRef xd) { xd = u; };
  EXPECT_NEAR(integrate_rk4(f, v1(0.0), v1(2.0), Vec(), 0.1)[0], 0.2, 1e-15);
}

TEST(IntegrateRk4, ExponentialGrowthMatchesClosedForm) {
  EXPECT_NEAR(integrate_rk4(kGrowth, v1(1.0), v1(0.0), Vec(), 0.1)[0], std::exp(0.1), 1e-7);
}

TEST(IntegrateRk4, FourthOrderGlobalConvergence) {
  auto global_error = [](int steps) {
    Vec x = v1(1.0);
    for (int i = 0; i < steps; ++i) x = integrate_rk4(kGrowth, x, v1(0.0), Vec(), 1.0 / steps);
    return std::abs(x[0] - std::exp(1.0));
  };
  for (int steps : {10, 20, 40}) {
    const double ratio = global_error(steps) / global_error(2 * steps);
    EXPECT_GE(ratio, 15.0) << "steps=" << steps;
  }
}

TEST(IntegrateRk4, NonFiniteOutputReportsStage) {
  const Dynamics bad = [](VecCRef, VecCRef, VecCRef, VecRef xd) {
    xd.setConstant(std::numeric_limits<double>::quiet_NaN());
  };
  try {
    integrate_rk4(bad, v1(0.0), v1(0.0), Vec(), 0.1, 7);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_EQ(e.stage(), 7);
  }
}

TEST(DiscreteStep, SubstepsRefineTheSameMap) {
  Rk4Workspace ws;
  Vec coarse(1), fine(1);
  discrete_step(kGrowth, v1(1.0), v1(0.0), Vec(), 1.0, 1, ws, coarse);
  discrete_step(kGrowth, v1(1.0), v1(0.0), Vec(), 1.0, 16, ws, fine);
  EXPECT_LT(std::abs(fine[0] - std::exp(1.0)), std::abs(coarse[0] - std::exp(1.0)) / 1000.0);
}

TEST(Linearize, RecoversLinearDiscreteMap) {
  Mat A(3, 3), B(3, 2);
  A << 0.1, -0.4, 0.0, 0.5, -0.2, 0.3, 0.0, 0.7, -1.1;
  B << 1.0, 0.0, 0.2, -0.5, 0.0, 2.0;
  const Dynamics f = [&](VecCRef x, VecCRef u, VecCRef, VecRef xd) { xd = A * x + B * u; };
  Mat Ad, Bd;
  oracle::rk4_discretize(A, B, 0.05, Ad, Bd);
  Vec x(3), u(2);
  x << 0.3, -1.2, 4.0;
  u << 0.5, -0.25;
  const auto lin = linearize(f, x, u, Vec(), 0.05);
  EXPECT_LT((lin.A - Ad).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((lin.B - Bd).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Linearize, ZeroDynamicsGivesIdentity) {
  Vec x(2), u(1);
  x << 1.0, 2.0;
  u << 3.0;
  const auto lin = linearize(kZero, x, u, Vec(), 0.1);
  EXPECT_LT((lin.A - Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(lin.B.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Linearize, CentralDifferenceBeatsOneSided) {
  // x_dot = x^3 + u. Reference derivative of f_d by Richardson extrapolation
  // of wide central differences, accurate to O(h^4).
  const Dynamics f = [](VecCRef x, VecCRef u, VecCRef, VecRef xd) { xd[0] = x[0] * x[0] * x[0] + u[0]; };
  const double x0 = 2.0, ts = 0.01;
  auto fd = [&](double x) { return integrate_rk4(f, v1(x), v1(0.0), Vec(), ts)[0]; };
  auto central = [&](double h) { return (fd(x0 + h) - fd(x0 - h)) / (2 * h); };
  const double ref = (4.0 * central(5e-4) - central(1e-3)) / 3.0;

  const double lin = linearize(f, v1(x0), v1(0.0), Vec(), ts).A(0, 0);
  const double h = fd_step(x0);
  const double one_sided = (fd(x0 + h) - fd(x0)) / h;
  const double err_central = std::abs(lin - ref);
  const double err_forward = std::abs(one_sided - ref);
  EXPECT_LT(err_central, err_forward / 100.0);
  EXPECT_LT(err_central, 1e-8);
}

TEST(Linearize, PassiveCoordinatesMatchFullDifferencesWhenUnread) {
  // x0 is never read by f, u1 never either.
  const Dynamics f = [](VecCRef x, VecCRef u, VecCRef, VecRef xd) {
    xd[0] = x[1];
    xd[1] = -x[1] + std::sin(u[0]);
  };
  Vec x(2), u(2), p(0);
  x << 3.0, 0.4;
  u << 0.2, -1.0;
  const auto full = linearize(f, x, u, p, 0.1, 2);
  const auto masked = linearize(f, x, u, p, 0.1, 2, 0, {0}, {1});
  EXPECT_EQ(masked.A.col(0), Vec::Unit(2, 0));
  EXPECT_TRUE(masked.B.col(1).isZero());
  EXPECT_LT((masked.A - full.A).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((masked.B - full.B).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(masked.A.col(1), full.A.col(1));
  EXPECT_EQ(masked.B.col(0), full.B.col(0));
}
