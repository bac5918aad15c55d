#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pnmpc/errors.hpp"
#include "pnmpc/harness/driver.hpp"
#include "pnmpc/harness/log.hpp"
#include "pnmpc/harness/path.hpp"
#include "pnmpc/harness/plot_data.hpp"
#include "pnmpc/harness/scenario.hpp"
#include "pnmpc/harness/sweep.hpp"

using namespace pnmpc;
using namespace pnmpc::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pnmpc_harness_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioSpec short_traction_run(const std::string& out) {
  ScenarioSpec s;
  s.kind = ScenarioKind::custom;
  s.plant.vehicle = plant::VehicleParams::traction_default();
  s.friction = preview::PathMap({0.0, 8.0}, {1.0, 0.2}, preview::Interpolation::hold);
  s.initial_speed = 3.0;
  s.duration = 1.5;
  s.output = scratch(out);
  return s;
}

ScenarioSpec braking_straight(const std::string& out) {
  ScenarioSpec s;
  s.plant.vehicle = plant::VehicleParams::braking_default();
  s.plant.actuator_delay = 0.02;
  s.controller = ControllerKind::braking;
  s.passive = true;
  s.driver.kind = DriverKind::speed_pi;
  s.driver.target_speed = 13.9;
  s.initial_speed = 5.56;
  s.path_length = 400.0;
  s.duration = 15.0;
  s.output = scratch(out);
  return s;
}

}  // namespace

TEST(ReferencePath, StraightProjectionSignsAndArcLength) {
  const auto path = ReferencePath::straight(50.0);
  EXPECT_DOUBLE_EQ(path.length(), 50.0);
  const auto p = path.project(12.3, 0.4, 0.1, 0.0);
  EXPECT_NEAR(p.s, 12.3, 1e-12);
  EXPECT_NEAR(p.lateral, 0.4, 1e-12);  // left is positive
  EXPECT_NEAR(p.heading_error, 0.1, 1e-12);
  EXPECT_NEAR(path.project(5.0, -1.0, 0.0, 40.0).lateral, -1.0, 1e-12);
}

TEST(ReferencePath, UTurnGeometry) {
  const auto path = ReferencePath::u_turn(40.0, 10.0);
  EXPECT_NEAR(path.length(), 80.0 + 10.0 * std::numbers::pi, 1e-9);
  const auto mid = path.at(40.0 + 5.0 * std::numbers::pi);
  EXPECT_NEAR(mid.x, 50.0, 1e-3);
  EXPECT_NEAR(mid.y, 10.0, 1e-3);
  EXPECT_NEAR(mid.heading, std::numbers::pi / 2, 1e-3);
  EXPECT_DOUBLE_EQ(mid.curvature, 0.1);
  const auto end = path.at(path.length());
  EXPECT_NEAR(end.x, 0.0, 1e-9);
  EXPECT_NEAR(end.y, 20.0, 1e-9);

  const auto k = path.curvature_map();
  EXPECT_EQ(k.sample(20.0), 0.0);
  EXPECT_EQ(k.sample(55.0), 0.1);
  EXPECT_EQ(k.sample(100.0), 0.0);

  // Inside the arc, the point 1 m towards the centre is 1 m left.
  const auto p = path.project(50.0 - 1.0, 10.0, std::numbers::pi / 2, 55.0);
  EXPECT_NEAR(p.lateral, 1.0, 1e-3);
}

TEST(ReferencePath, IsoCourseDimensions) {
  const IsoCourse c(1.3);
  EXPECT_NEAR(c.entry.y_hi - c.entry.y_lo, 1.1 * 1.3 + 0.25, 1e-12);
  EXPECT_NEAR(c.offset.y_hi - c.offset.y_lo, 2.3, 1e-12);
  EXPECT_NEAR(c.exit.y_hi - c.exit.y_lo, 3.0, 1e-12);
  EXPECT_NEAR(c.offset.y_lo - c.entry.y_hi, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(c.entry.x1, 12.0);
  EXPECT_DOUBLE_EQ(c.offset.x0, 25.5);
  EXPECT_DOUBLE_EQ(c.offset.x1, 36.5);
  EXPECT_DOUBLE_EQ(c.exit.x0, 49.0);
  EXPECT_DOUBLE_EQ(c.end_x(), 61.0);
}

TEST(ReferencePath, IsoCentrelineKeepsAnAlignedBodyInsideEveryGate) {
  const IsoCourse c(1.3);
  const auto path = ReferencePath::iso3888(c, 20.0, 10.0);
  for (const auto& s : path.samples())
    ASSERT_FALSE(footprint_hits_gate(s.x, s.y, s.heading, 2.5, 1.3, c)) << "x = " << s.x;
  // Curvature agrees with the heading derivative.
  for (double s = 25.0; s < path.length() - 20.0; s += 3.7) {
    const double h = 0.05;
    const double dpsi = wrap_angle(path.at(s + h).heading - path.at(s - h).heading) / (2 * h);
    EXPECT_NEAR(path.at(s).curvature, dpsi, 2e-3) << s;
  }
}

TEST(Footprint, OffsetBodyClipsTheEntryGate) {
  const IsoCourse c(1.3);
  EXPECT_FALSE(footprint_hits_gate(5.0, 0.0, 0.0, 2.5, 1.3, c));
  EXPECT_TRUE(footprint_hits_gate(5.0, 0.3, 0.0, 2.5, 1.3, c));
  EXPECT_TRUE(footprint_hits_gate(5.0, 0.0, 0.3, 2.5, 1.3, c));  // yawed corners
  EXPECT_FALSE(footprint_hits_gate(18.0, 1.0, 0.0, 2.5, 1.3, c));  // open section
}

TEST(Drivers, FullThrottleIsTheMotorLimit) {
  const auto p = plant::VehicleParams::traction_default();
  EXPECT_EQ(driver_full_throttle(p), p.tau_m_max);
}

TEST(Drivers, SpeedPiSignsAndAntiWindup) {
  SpeedPi pi(100.0, 50.0, -300.0, 400.0);
  EXPECT_EQ(pi.update(10.0, 10.0, 0.1), 0.0);
  EXPECT_GT(pi.update(9.0, 10.0, 0.1), 0.0);
  SpeedPi sat(100.0, 50.0, -300.0, 400.0);
  for (int i = 0; i < 1000; ++i) EXPECT_LE(sat.update(0.0, 10.0, 0.1), 400.0);
  EXPECT_LE(sat.integrator(), 400.0);
  // Once the error reverses the output leaves saturation immediately.
  EXPECT_LT(sat.update(10.5, 10.0, 0.1), 400.0);
}

TEST(Drivers, PathTrackingFeedforwardAndSigns) {
  DriverSpec d;
  PathTracker t(d, 2.2);
  ReferencePath::Projection on;
  EXPECT_EQ(t.update(on, 0.0, 0.001), 0.0);
  EXPECT_NEAR(t.update(on, 0.1, 0.001), 0.22, 1e-15);
  PathTracker left(d, 2.2);
  ReferencePath::Projection off;
  off.lateral = 0.5;
  EXPECT_LT(left.update(off, 0.0, 0.001), 0.0);
  ReferencePath::Projection yawed;
  yawed.heading_error = 0.1;
  PathTracker h(d, 2.2);
  EXPECT_LT(h.update(yawed, 0.0, 0.001), 0.0);
}

TEST(Drivers, NegativeGainIsRejected) {
  DriverSpec d;
  d.speed_ki = -1.0;
  EXPECT_THROW(d.validate(), ValidationError);
}

TEST(Drivers, SpeedPiSettlesWithinTenSeconds) {
  const auto spec = braking_straight("pi_settle.csv");
  const auto res = run_scenario(spec);
  ASSERT_FALSE(res.faulted) << res.fault;
  const auto log = read_log(res.log);
  const auto t = log.column("t");
  const auto V = log.column("V");
  double settle = 0.0;
  for (std::size_t i = 0; i < V.size(); ++i)
    if (std::abs(V[i] - 13.9) > 0.05 * 13.9) settle = t[i];
  EXPECT_LT(settle, 10.0);
}

TEST(Scenario, LogHasOneMonotoneRowPerStep) {
  const auto res = run_scenario(short_traction_run("rows.csv"));
  ASSERT_FALSE(res.faulted);
  const auto log = read_log(res.log);
  EXPECT_EQ(log.columns, log_columns());
  EXPECT_EQ(static_cast<long>(log.rows.size()), res.steps);
  EXPECT_EQ(res.steps, 1500);
  const auto t = log.column("t");
  for (std::size_t i = 1; i < t.size(); ++i) ASSERT_GT(t[i], t[i - 1]);
}

TEST(Scenario, CommandsChangeOnlyAtControllerBoundaries) {
  const auto spec = short_traction_run("rate.csv");
  const auto res = run_scenario(spec);
  const auto log = read_log(res.log);
  const auto cmd = log.column("tau_m_cmd");
  const long every = spec.control_every();
  EXPECT_EQ(every, 25);
  EXPECT_EQ(res.controller_calls, 60);
  for (std::size_t i = 1; i < cmd.size(); ++i)
    if (static_cast<long>(i) % every != 0) ASSERT_EQ(cmd[i], cmd[i - 1]) << i;
  // The plant delay is 100 ms: the delivered torque ignores the first
  // command until then.
  const auto act = log.column("tau_m_actual");
  for (std::size_t i = 0; i <= 100; ++i) ASSERT_EQ(act[i], 0.0) << i;
  EXPECT_GT(act[101], 0.0);
}

TEST(Scenario, RerunIsByteIdentical) {
  auto a = short_traction_run("det_a.csv");
  auto b = short_traction_run("det_b.csv");
  run_scenario(a);
  run_scenario(b);
  EXPECT_EQ(slurp(a.output), slurp(b.output));
}

TEST(Scenario, SeededNoiseIsReproducible) {
  auto a = short_traction_run("noise_a.csv");
  auto b = short_traction_run("noise_b.csv");
  auto c = short_traction_run("noise_c.csv");
  a.speed_noise = b.speed_noise = c.speed_noise = 0.05;
  a.seed = b.seed = 3;
  c.seed = 4;
  run_scenario(a);
  run_scenario(b);
  run_scenario(c);
  EXPECT_EQ(slurp(a.output), slurp(b.output));
  EXPECT_NE(slurp(a.output), slurp(c.output));
}

TEST(Scenario, OffPathAbortWritesFaultRow) {
  auto s = braking_straight("fault.csv");
  s.path = PathKind::u_turn;
  s.off_path_limit = 0.5;
  s.driver.steer_kp_lateral = 0.0;
  s.driver.steer_ki_lateral = 0.0;
  s.driver.steer_kp_heading = 0.0;
  s.driver.lookahead = 1e3;  // no feedforward either
  const auto res = run_scenario(s);
  ASSERT_TRUE(res.faulted);
  EXPECT_NE(res.fault.find("left the path"), std::string::npos);
  const std::string text = slurp(s.output);
  const auto last = text.rfind("FAULT,");
  ASSERT_NE(last, std::string::npos);
  EXPECT_EQ(text.find('\n', last), text.size() - 1);
  const auto log = read_log(s.output);
  EXPECT_TRUE(log.faulted);
  EXPECT_EQ(static_cast<long>(log.rows.size()), res.steps);
}

namespace {

fs::path write_file(const std::string& name, const std::string& body) {
  const auto p = scratch(name);
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST(ScenarioConfig, CheckedInScenariosValidate) {
  for (const char* f : {"friction_step.cfg", "friction_step_reactive.cfg",
                        "friction_step_passive.cfg", "delay_sweep_base.cfg", "u_turn.cfg",
                        "u_turn_passive.cfg", "iso3888_alpha3.cfg", "iso3888_alpha6.cfg",
                        "iso3888_alpha9.cfg"}) {
    EXPECT_NO_THROW(load_scenario(fs::path(PNMPC_DATA_DIR) / "scenarios" / f)) << f;
  }
  EXPECT_NO_THROW(load_sweep(fs::path(PNMPC_DATA_DIR) / "scenarios" / "delay_sweep.cfg"));
}

TEST(ScenarioConfig, OverridesReachTheControllerAndPlant) {
  const auto s = load_scenario(fs::path(PNMPC_DATA_DIR) / "scenarios" / "iso3888_alpha6.cfg");
  EXPECT_NEAR(s.braking.alpha_R_max, 6.0 * std::numbers::pi / 180.0, 1e-12);
  EXPECT_EQ(s.braking.Fs, 1.0);
  EXPECT_EQ(s.plant.vehicle.m, 550.0);
}

TEST(ScenarioConfig, EveryBadKeyIsListed) {
  const auto data = fs::path(PNMPC_DATA_DIR);
  const auto cfg = write_file(
      "bad.cfg", "vehicle = " + (data / "vehicles/traction_vehicle.params").string() +
                     "\ncontroller = " + (data / "controllers/traction_preemptive.cfg").string() +
                     "\ndriver = autopilot\nduration = -1\nspeling = 3\ncontroller.N = 0\n"
                     "vehicle.mass = -5\n");
  try {
    load_scenario(cfg);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    std::string all;
    for (const auto& p : e.problems()) all += p + "\n";
    EXPECT_GE(e.problems().size(), 5u) << all;
    for (const char* key : {"driver", "duration", "speling", "N", "mass"})
      EXPECT_NE(all.find(key), std::string::npos) << key << "\n" << all;
  }
}

TEST(ScenarioConfig, ControlPeriodMustBeAMultipleOfDt) {
  const auto data = fs::path(PNMPC_DATA_DIR);
  const auto cfg = write_file(
      "rate.cfg", "vehicle = " + (data / "vehicles/traction_vehicle.params").string() +
                      "\ncontroller = " + (data / "controllers/traction_preemptive.cfg").string() +
                      "\ndt = 0.0007\n");
  EXPECT_THROW(load_scenario(cfg), ValidationError);
}

TEST(ScenarioConfig, FrictionStepNeedsExactlyOneDrop) {
  const auto data = fs::path(PNMPC_DATA_DIR);
  const auto map = write_file("two_drops.map", "0 1.0\n20 0.5\n30 0.2\n");
  const auto cfg = write_file(
      "fs.cfg", "scenario = friction_step\nvehicle = " +
                    (data / "vehicles/traction_vehicle.params").string() + "\ncontroller = " +
                    (data / "controllers/traction_preemptive.cfg").string() +
                    "\nfriction_map = " + map.string() + "\n");
  EXPECT_THROW(load_scenario(cfg), ValidationError);
}

TEST(PlotData, Fig3PanelsAndHeaders) {
  const auto res = run_scenario(short_traction_run("plot.csv"));
  const auto out = scratch("plots3");
  fs::remove_all(out);
  const auto files = emit_plot_data(res.log, "fig3", out);
  ASSERT_EQ(files.size(), 3u);
  std::ifstream in(out / "fig3a_torques.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,tau_driver,tau_ctrl,tau_m_actual");
  const auto panel = read_log(out / "fig3c_slip.csv");
  EXPECT_EQ(panel.rows.size(), 1500u);
}

TEST(PlotData, MissingColumnNamesThePanel) {
  const auto log = write_file("thin.csv", "t,V\n0,1\n");
  const auto out = scratch("plots_thin");
  fs::remove_all(out);
  try {
    emit_plot_data(log, "fig5", out);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("fig5a_path"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(fs::exists(out));
}

TEST(PlotData, EmptyLogWritesNothing) {
  std::string header;
  for (const auto& c : log_columns()) header += (header.empty() ? "" : ",") + c;
  const auto log = write_file("empty.csv", header + "\n");
  const auto out = scratch("plots_empty");
  fs::remove_all(out);
  EXPECT_THROW(emit_plot_data(log, "fig6", out), ConfigError);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_THROW(emit_plot_data(log, "fig9", out), ConfigError);
}

TEST(Sweep, SummaryIsSortedAndComplete) {
  SweepSpec s;
  s.base = short_traction_run("unused.csv");
  s.base.duration = 0.6;
  s.delays = {0.05, 0.0};
  s.modes = {"passive", "preemptive"};
  s.output_dir = scratch("sweep");
  s.warmup = 0.1;
  const auto cells = run_sweep(s);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].mode, "preemptive");
  EXPECT_EQ(cells[0].delay, 0.0);
  EXPECT_EQ(cells[3].mode, "passive");
  EXPECT_EQ(cells[3].delay, 0.05);
  const auto table = read_log(sweep_summary_path(s));
  ASSERT_EQ(table.rows.size(), 4u);
  EXPECT_EQ(table.text_cell(0, "mode"), "preemptive");
  EXPECT_EQ(table.column("delay_ms")[1], 50.0);
  for (const auto& c : cells) EXPECT_TRUE(fs::exists(c.result.log));
}
