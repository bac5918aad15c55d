#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pnmpc/ocp/integrator.hpp"
#include "pnmpc/plant/simulation.hpp"
#include "pnmpc/traction/traction.hpp"

using namespace pnmpc;
using namespace pnmpc::traction;
using preview::Interpolation;
using preview::PathMap;
using preview::PreviewMode;

namespace {

struct Loop {
  plant::VehicleParams p = plant::VehicleParams::traction_default();
  plant::TireParams t;
  plant::PlantState s;
  plant::DelayLine line;
  double dt = 1e-3;

  Loop(double v0, double delay, double lag) : line(delay, 1e-3, lag) {
    s.vx = v0;
    s.omega.fill(v0 / p.R);
  }

  TractionMeasurement measure(const plant::Quad& mu, double cmd) const {
    plant::ActuatorInput in;
    in.tau_m_cmd = cmd;
    const auto acc = plant::body_acceleration(s, s.tau_m_actual, in, mu, p, t);
    const auto fz = plant::vertical_loads(acc.ax, acc.ay, p);
    TractionMeasurement m;
    m.x = {s.tau_m_actual, s.omega[0] * p.R - s.vx, s.omega[1] * p.R - s.vx, s.omega[0], s.omega[1]};
    m.V = s.vx;
    m.Fz_FL = fz[0];
    m.Fz_FR = fz[1];
    return m;
  }

  void advance(double cmd, const plant::Quad& mu, double T) {
    plant::ActuatorInput in;
    in.tau_m_cmd = cmd;
    for (int k = 0; k < std::lround(T / dt); ++k) s = plant::plant_step(s, in, mu, dt, p, t, line);
  }
};

plant::Quad wheel_mu(const PathMap& m, double s_cg, const plant::VehicleParams& p) {
  const double f = m.sample(s_cg + p.a), r = m.sample(s_cg - p.b);
  return {f, f, r, r};
}

}  // namespace

TEST(SlipError, Examples) {
  EXPECT_EQ(slip_error(0.08, 0.0, 50.0, 0.3), 0.08);
  EXPECT_NEAR(slip_error(0.08, 1.5, 50.0, 0.3), -0.02, 1e-15);
  EXPECT_NEAR(slip_error(0.08, 0.08 * 50.0 * 0.3, 50.0, 0.3), 0.0, 1e-15);
  // Below v_eps the denominator is regularised.
  EXPECT_NEAR(slip_error(0.0, 0.1, 0.0, 0.3), -0.2, 1e-15);
}

TEST(ReferenceSlip, GridNodesExact) {
  const auto table = ReferenceSlipTable::build(plant::TireParams{}, 0.6);
  for (std::size_t i = 0; i < table.mu_grid().size(); ++i)
    for (std::size_t j = 0; j < table.fz_grid().size(); ++j) {
      bool clamped = true;
      EXPECT_EQ(reference_slip(table.mu_grid()[i], table.fz_grid()[j], table, &clamped),
                table.value(i, j));
      EXPECT_FALSE(clamped);
    }
}

TEST(ReferenceSlip, MatchesScannedPeak) {
  const plant::TireParams tires;
  const double margin = 0.6, fz = tires.Fz0;
  double best = -1.0, arg = 0.0;
  for (int i = 1; i <= 10000; ++i) {
    const double s = i * 1e-4;
    const double f = plant::magic_formula(s, 1.0, fz, tires, plant::TireAxis::longitudinal);
    if (f > best) {
      best = f;
      arg = s;
    }
  }
  const auto table = ReferenceSlipTable::build(tires, margin);
  const double ref = reference_slip(1.0, fz, table);
  EXPECT_NEAR(ref, margin * arg, margin * 1e-4);
  EXPECT_GT(ref, 0.0);
  EXPECT_LE(ref, 0.2);
  EXPECT_LE(reference_slip(0.2, fz, table), reference_slip(1.0, fz, table));
}

TEST(ReferenceSlip, OutOfGridIsClampedAndFlagged) {
  const std::vector<double> mu{0.2, 1.0}, fz{1000.0, 3000.0};
  const ReferenceSlipTable table(mu, fz, {0.05, 0.06, 0.07, 0.08}, 0.6);
  bool clamped = false;
  EXPECT_EQ(table.lookup(5.0, 1e5, &clamped), 0.08);
  EXPECT_TRUE(clamped);
  EXPECT_NEAR(table.lookup(0.6, 2000.0, &clamped), 0.065, 1e-15);
  EXPECT_FALSE(clamped);
}

TEST(TractionModel, Equilibrium) {
  TractionModel m{plant::VehicleParams::traction_default(), {}, 0.02};
  const TractionState x{0.0, 0.0, 0.0, 30.0, 30.0};
  const auto d = prediction_dynamics(x, {0.0, 0.0, 0.0}, 1.0, {2400.0, 2400.0}, m);
  for (double v : d) EXPECT_EQ(v, 0.0);
}

TEST(TractionModel, TorqueWithoutTireForce) {
  TractionModel m{plant::VehicleParams::traction_default(), {}, 0.02};
  const TractionState x{50.0, 0.0, 0.0, 30.0, 30.0};
  const auto d = prediction_dynamics(x, {50.0, 0.0, 0.0}, 0.0, {2400.0, 2400.0}, m);
  const double expect = 50.0 * m.vehicle.gear_ratio / (2.0 * m.vehicle.Jw);
  EXPECT_NEAR(d[3], expect, 1e-12);
  EXPECT_NEAR(d[4], expect, 1e-12);
  EXPECT_EQ(d[0], 0.0);
}

TEST(TractionModel, AgreesWithPlantOnHighFriction) {
  const auto p = plant::VehicleParams::traction_default();
  const plant::TireParams t;
  const double T_m = 0.02, tau = 70.0, v0 = 8.0;
  Loop loop(v0, 0.0, T_m);
  const auto fz = plant::vertical_loads(0.0, 0.0, p);
  TractionModel model{p, t, T_m};
  ocp::Dynamics f = [&](ocp::VecCRef x, ocp::VecCRef u, ocp::VecCRef, ocp::VecRef xd) {
    const auto d = prediction_dynamics({x[0], x[1], x[2], x[3], x[4]}, {u[0], 0.0, 0.0}, 1.0,
                                       {fz[0], fz[1]}, model);
    for (int i = 0; i < 5; ++i) xd[i] = d[static_cast<std::size_t>(i)];
  };
  ocp::Vec x(5), u(1), par(0);
  x << 0.0, 0.0, 0.0, v0 / p.R, v0 / p.R;
  u << tau;
  double worst = 0.0;
  for (int k = 0; k < 250; ++k) {
    x = ocp::integrate_rk4(f, x, u, par, 1e-3);
    loop.advance(tau, {1.0, 1.0, 1.0, 1.0}, 1e-3);
    const double sig_model = x[1] / (x[3] * p.R);
    const double sig_plant = (loop.s.omega[0] * p.R - loop.s.vx) / (loop.s.omega[0] * p.R);
    worst = std::max(worst, std::abs(sig_model - sig_plant));
  }
  EXPECT_LT(worst, 0.02);
}

TEST(TractionController, ZeroDriverRequest) {
  const auto p = plant::VehicleParams::traction_default();
  TractionController c({}, p, {});
  Loop loop(10.0, 0.1, 0.02);
  const auto info = c.step(loop.measure({1, 1, 1, 1}, 0.0), 0.0, PathMap::constant(1.0), 5.0);
  EXPECT_EQ(info.tau_m_mod, 0.0);
}

TEST(TractionController, HighFrictionPassesDriverRequest) {
  const auto p = plant::VehicleParams::traction_default();
  TractionController c({}, p, {});
  Loop loop(10.0, 0.1, 0.02);
  const PathMap mu = PathMap::constant(1.0);
  const double drv = 40.0;
  double cmd = drv;
  for (int k = 0; k < 40; ++k) {
    const auto info = c.step(loop.measure({1, 1, 1, 1}, cmd), drv, mu, loop.s.s_travel + p.a);
    cmd = info.tau_m_mod;
    EXPECT_NEAR(cmd, drv, 0.01 * drv) << "step " << k;
    loop.advance(cmd, {1, 1, 1, 1}, 0.025);
  }
}

TEST(TractionController, PreemptiveReductionBeforeTransition) {
  const auto p = plant::VehicleParams::traction_default();
  TractionNmpcConfig cfg;
  TractionController c(cfg, p, {});
  Loop loop(10.0, cfg.dt_delay, 0.02);
  loop.s.s_travel = 20.0 - p.a;  // front axle 10 m before the drop
  const PathMap map({0.0, 30.0}, {1.0, 0.2}, Interpolation::hold);
  const double drv = p.tau_m_max;
  double cmd = drv, t = 0.0, t_reduced = -1.0, t_reach = -1.0;
  while (t < 3.0 && t_reach < 0.0) {
    const auto mu = wheel_mu(map, loop.s.s_travel, p);
    const auto info = c.step(loop.measure(mu, cmd), drv, map, loop.s.s_travel + p.a);
    cmd = info.tau_m_mod;
    if (t_reduced < 0.0 && cmd < 0.8 * drv) t_reduced = t;
    for (int k = 0; k < 25 && t_reach < 0.0; ++k) {
      loop.advance(cmd, wheel_mu(map, loop.s.s_travel, p), 1e-3);
      t += 1e-3;
      if (loop.s.s_travel + p.a >= 30.0) t_reach = t;
    }
  }
  ASSERT_GT(t_reach, 0.0);
  ASSERT_GE(t_reduced, 0.0);
  EXPECT_LE(t_reduced, t_reach - cfg.dt_delay);
}

TEST(TractionController, HardBoundsOnRandomCalls) {
  const auto p = plant::VehicleParams::traction_default();
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  TractionController c({}, p, {});
  const PathMap map({0.0, 10.0, 20.0, 35.0}, {1.0, 0.3, 0.8, 0.1}, Interpolation::hold);
  for (int k = 0; k < 1000; ++k) {
    TractionMeasurement m;
    const double v = 0.5 + 25.0 * U(rng);
    m.V = v;
    m.x.omega_FL = v / p.R * (0.8 + 1.5 * U(rng));
    m.x.omega_FR = v / p.R * (0.8 + 1.5 * U(rng));
    m.x.s_FL = m.x.omega_FL * p.R - v;
    m.x.s_FR = m.x.omega_FR * p.R - v;
    m.x.tau_m = p.tau_m_max * U(rng);
    m.Fz_FL = 1500.0 + 2000.0 * U(rng);
    m.Fz_FR = 1500.0 + 2000.0 * U(rng);
    const double drv = U(rng) < 0.1 ? 0.0 : p.tau_m_max * U(rng);
    if (U(rng) < 0.05) c.reset();
    const auto info = c.step(m, drv, map, 40.0 * U(rng));
    ASSERT_GE(info.tau_m_mod, 0.0) << k;
    ASSERT_LE(info.tau_m_mod, drv) << k;
  }
}

TEST(TractionController, ReactiveEqualsPreemptiveOnUniformFriction) {
  const auto p = plant::VehicleParams::traction_default();
  TractionNmpcConfig pre, rea;
  rea.mode = PreviewMode::reactive;
  TractionController a(pre, p, {}), b(rea, p, {});
  const PathMap mu = PathMap::constant(0.3);
  Loop la(6.0, 0.1, 0.02), lb(6.0, 0.1, 0.02);
  double ca = p.tau_m_max, cb = p.tau_m_max;
  for (int k = 0; k < 60; ++k) {
    const plant::Quad m{0.3, 0.3, 0.3, 0.3};
    ca = a.step(la.measure(m, ca), p.tau_m_max, mu, la.s.s_travel + p.a).tau_m_mod;
    cb = b.step(lb.measure(m, cb), p.tau_m_max, mu, lb.s.s_travel + p.a).tau_m_mod;
    ASSERT_NEAR(ca, cb, 1e-9) << k;
    la.advance(ca, m, 0.025);
    lb.advance(cb, m, 0.025);
  }
}

TEST(TractionConfig, ReadsKeysAndRejectsBadOnes) {
  std::istringstream good("mode = reactive\nN = 50\nTs = 0.005\ndt_delay = 0.15\nweights = 500, 600, 1e-3\nT_m = 0.03\n");
  const KvConfig cfg = KvConfig::parse(good, "t.cfg");
  KvReader r(cfg);
  const auto c = read_traction_config(r);
  r.finish();
  EXPECT_EQ(c.mode, PreviewMode::reactive);
  EXPECT_EQ(c.N, 50);
  EXPECT_EQ(c.W_slack_FR, 600.0);
  EXPECT_EQ(c.W_tau, 1e-3);
  EXPECT_EQ(c.T_m, 0.03);

  std::istringstream bad("mode = psychic\nN = 0\nweights = 1, 2\n");
  const KvConfig bcfg = KvConfig::parse(bad, "b.cfg");
  KvReader br(bcfg);
  read_traction_config(br);
  EXPECT_EQ(br.problems().size(), 3u);
}
