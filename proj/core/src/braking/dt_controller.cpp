#include <algorithm>
#include <cmath>
#include <numbers>

#include "pnmpc/braking/braking.hpp"
#include "pnmpc/errors.hpp"

namespace pnmpc::braking {

using ocp::Vec;
using ocp::VecCRef;
using ocp::VecRef;

namespace {

enum P { kK = 0, kMu, kVmax, kDriver, kNp };

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

void DtNmpcConfig::validate() const {
  std::vector<std::string> p;
  if (N < 1) p.push_back("N must be >= 1");
  if (!(Ts > 0.0)) p.push_back("Ts must be > 0");
  if (!(W_V >= 0.0 && W_alpha >= 0.0 && W_tau >= 0.0)) p.push_back("weights must be >= 0");
  if (!(alpha_R_max > 0.0)) p.push_back("alpha_R_max must be > 0");
  if (!(tau_min < 0.0)) p.push_back("tau_min must be < 0");
  if (!(V_veh_max > 0.0)) p.push_back("V_veh_max must be > 0");
  if (!(Fs > 0.0 && Fs <= 1.0)) p.push_back("Fs must be in (0, 1]");
  if (!(motor_floor <= 0.0)) p.push_back("motor_floor must be <= 0");
  if (!(brake_front_share >= 0.0 && brake_front_share <= 1.0))
    p.push_back("brake_front_share must be in [0, 1]");
  if (sqp_iters < 1) p.push_back("sqp_iters must be >= 1");
  if (!p.empty()) throw ValidationError(p);
}

DtNmpcConfig read_dt_config(KvReader& r, const DtNmpcConfig& d) {
  DtNmpcConfig c = d;
  c.N = r.integer("N", d.N, 1, 1000);
  c.Ts = r.number("Ts", d.Ts, 1e-6, 10.0);
  c.alpha_R_max = r.number("alpha_R_max_deg", d.alpha_R_max / kDeg, 1e-6, 90.0) * kDeg;
  c.Fs = r.number("Fs", d.Fs, 1e-6, 1.0);
  c.V_veh_max = r.number("V_veh_max", d.V_veh_max, 1e-6, 200.0);
  c.tau_min = r.number("tau_min", d.tau_min, -1e6, -1e-9);
  const std::string mu = r.choice("mu_mode", d.mu_mode == MuMode::constant ? "constant" : "variable",
                                  {"constant", "variable"});
  c.mu_mode = mu == "constant" ? MuMode::constant : MuMode::variable;
  c.motor_floor = r.number("motor_floor", d.motor_floor, -1e6, 0.0);
  c.brake_front_share = r.number("brake_front_share", d.brake_front_share, 0.0, 1.0);
  c.sqp_iters = r.integer("sqp_iters", d.sqp_iters, 1, 100);
  const auto w = r.numbers("weights", {d.W_V, d.W_alpha, d.W_tau});
  if (w.size() != 3) {
    r.problem(r.config().source() + ": 'weights' needs three values (V, alpha, tau)");
  } else if (w[0] < 0.0 || w[1] < 0.0 || w[2] < 0.0) {
    r.problem(r.config().source() + ": 'weights' must be >= 0");
  } else {
    c.W_V = w[0];
    c.W_alpha = w[1];
    c.W_tau = w[2];
  }
  return c;
}

DtNmpcConfig load_dt_config(const std::filesystem::path& path) {
  const KvConfig cfg = KvConfig::load(path);
  KvReader r(cfg);
  DtNmpcConfig c = read_dt_config(r);
  r.finish();
  c.validate();
  return c;
}

double TorqueAllocation::wheel_total(const plant::VehicleParams& p) const {
  return p.gear_ratio * motor - (brake[0] + brake[1] + brake[2] + brake[3]);
}

TorqueAllocation allocate_torque(double tau_wh, const plant::VehicleParams& p,
                                 double motor_floor, double front_share) {
  TorqueAllocation a;
  const double floor_at_wheels = p.gear_ratio * motor_floor;
  if (tau_wh >= floor_at_wheels) {
    a.motor = tau_wh / p.gear_ratio;
    return a;
  }
  a.motor = motor_floor;
  const double total = floor_at_wheels - tau_wh;
  const double front = 0.5 * front_share * total;
  const double rear = 0.5 * (total - 2.0 * front);
  a.brake = {front, front, rear, rear};
  return a;
}

double rear_axle_slip_angle(double V, double beta, double yaw_rate, double b) {
  return std::atan((V * std::sin(beta) - yaw_rate * b) /
                   std::max(V * std::cos(beta), plant::kSlipSpeedEps));
}

std::array<double, 8> dt_prediction_dynamics(const DtState& x, const DtControl& u, double K_n,
                                             double mu, const DtModel& m) {
  const auto& p = m.vehicle;
  const double V = std::max(x.V, plant::kSlipSpeedEps);
  const double vx = V * std::cos(x.beta), vy = V * std::sin(x.beta);
  const double delta = p.wheelbase() * K_n;

  const TorqueAllocation alloc = allocate_torque(u.tau_wh, p, m.motor_floor, m.brake_front_share);
  const plant::Quad drive = plant::drive_torques(alloc.motor, p);

  // One load-transfer sweep seeded with quasi-static accelerations.
  const double ax0 = (u.tau_wh / p.R - plant::resistance_force(vx, p)) / p.m;
  const double ay0 = V * x.yaw_rate;
  const plant::ChassisForces f = plant::chassis_forces(vx, vy, x.yaw_rate, x.omega, delta,
                                                       {mu, mu, mu, mu}, p, m.tires, 1, ax0, ay0);
  const double dvx = (f.Fx - plant::resistance_force(vx, p)) / p.m + x.yaw_rate * vy;
  const double dvy = f.Fy / p.m - x.yaw_rate * vx;

  std::array<double, 8> d{};
  d[0] = x.V;
  d[1] = (vx * dvx + vy * dvy) / V;
  d[2] = (vx * dvy - vy * dvx) / (V * V);
  d[3] = f.Mz / p.Iz;
  for (std::size_t i = 0; i < 4; ++i) {
    const double brake = alloc.brake[i] * std::tanh(x.omega[i] / 0.1);
    d[4 + i] = (drive[i] - brake - f.fx_wheel[i] * p.R) / p.Jw;
  }
  return d;
}

DtController::DtController(DtNmpcConfig cfg, plant::VehicleParams vehicle, plant::TireParams tires,
                           ocp::SolverConfig solver)
    : cfg_(cfg), solver_(solver) {
  cfg_.validate();
  vehicle.validate();
  tires.validate();
  model_ = {vehicle, tires, cfg_.motor_floor, cfg_.brake_front_share};
  solver_.config().max_sqp_iters = cfg_.sqp_iters;
}

void DtController::reset() {
  have_warm_ = false;
  last_ = {};
}

ocp::OcpProblem DtController::build_problem(const DtState& meas, double tau_driver,
                                            const preview::PathMap& curvature,
                                            const preview::PathMap& mu_map) const {
  const int N = cfg_.N;
  const auto& veh = model_.vehicle;
  const double V = std::max(meas.V, 0.0);
  const auto S_fut = preview::future_distances(meas.S, V, N, cfg_.Ts);
  const auto K = preview::curvature_preview(curvature, S_fut);
  const auto mu = preview::friction_preview(mu_map, S_fut, 0.0,
                                            cfg_.mu_mode == MuMode::constant
                                                ? preview::PreviewMode::reactive
                                                : preview::PreviewMode::preemptive);

  ocp::OcpProblem pb;
  pb.N = N;
  pb.Ts = cfg_.Ts;
  pb.nx = 8;
  pb.nu = 3;
  pb.np = kNp;
  pb.nr = 3;
  pb.nc = 3;

  // Resolve the wheel-slip time constant Jw v / (R^2 B C D mu Fz).
  const double fz_max = veh.m * plant::kGravity * std::max(veh.a, veh.b) / veh.wheelbase() * 0.5;
  double mu_max = 0.0;
  for (double m : mu.values) mu_max = std::max(mu_max, m);
  const auto& t = model_.tires;
  const double stiff = t.Bx * t.Cx * t.Dx * std::max(mu_max, 0.05) * fz_max;
  const double tau_w = veh.Jw * std::max(V, 2.0) / (veh.R * veh.R * stiff);
  const double h = std::clamp(2.0 * tau_w, 1e-3, 1e-2);
  pb.substeps = std::max(1, static_cast<int>(std::ceil(cfg_.Ts / h - 1e-9)));
  pb.allocate();

  const DtModel model = model_;
  pb.dynamics = [model](VecCRef x, VecCRef u, VecCRef p, VecRef xdot) {
    const DtState xs{x[0], x[1], x[2], x[3], {x[4], x[5], x[6], x[7]}};
    const auto d = dt_prediction_dynamics(xs, {u[0], u[1], u[2]}, p[kK], p[kMu], model);
    for (int i = 0; i < 8; ++i) xdot[i] = d[static_cast<std::size_t>(i)];
  };
  pb.passive_states = {0};
  pb.passive_controls = {1, 2};

  const double tau_norm = veh.gear_ratio * veh.tau_m_max;
  pb.residual = [tau_norm](VecCRef, VecCRef u, VecCRef p, VecRef r) {
    r[0] = (p[kDriver] - u[0]) / tau_norm;
    r[1] = u[1];
    r[2] = u[2];
  };
  const double b = veh.b, amax = cfg_.alpha_R_max;
  pb.constraints = [b, amax](VecCRef x, VecCRef u, VecCRef p, VecRef h) {
    const double aR = rear_axle_slip_angle(x[1], x[2], x[3], b);
    h[0] = x[1] - u[1] - p[kVmax];
    h[1] = aR - u[2] - amax;
    h[2] = -aR - u[2] - amax;
  };
  pb.weights = Vec(3);
  pb.weights << cfg_.W_tau, cfg_.W_V, cfg_.W_alpha;

  const double lo = std::min(cfg_.tau_min, tau_driver);
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    pb.params(kK, n) = K[i];
    pb.params(kMu, n) = mu[i];
    pb.params(kVmax, n) = preview::speed_limit(mu[i], K[i], cfg_.Fs, cfg_.V_veh_max);
    pb.params(kDriver, n) = tau_driver;
    pb.u_lo.col(n) << lo, 0.0, 0.0;
    pb.u_hi(0, n) = tau_driver;
  }
  pb.x0 = Vec(8);
  pb.x0 << meas.S, meas.V, meas.beta, meas.yaw_rate, meas.omega[0], meas.omega[1], meas.omega[2],
      meas.omega[3];
  pb.u_scale = Vec(3);
  pb.u_scale << tau_norm, 1.0, 0.02;
  return pb;
}

DtStepInfo DtController::step(const DtState& meas, double tau_driver,
                              const preview::PathMap& curvature, const preview::PathMap& mu_map) {
  DtStepInfo info;
  const ocp::OcpProblem pb = build_problem(meas, tau_driver, curvature, mu_map);
  info.K0 = pb.params(kK, 0);
  info.mu0 = pb.params(kMu, 0);
  info.V_max_fut0 = pb.params(kVmax, 0);

  ocp::Trajectory warm;
  if (have_warm_) {
    warm = ocp::shift_warm_start(last_.trajectory);
  } else {
    warm.controls = ocp::Mat::Zero(3, cfg_.N);
    warm.controls.row(0).setConstant(tau_driver);
    warm.states = ocp::Mat::Zero(8, cfg_.N + 1);
  }

  bool ok = false;
  try {
    last_ = solver_.solve(pb, &warm);
    ok = last_.status != ocp::SolveStatus::failed && last_.trajectory.controls.col(0).allFinite();
  } catch (const std::exception& e) {
    last_ = {};
    last_.message = e.what();
  }

  info.status = last_.status;
  info.iterations = last_.iterations;
  info.kkt = last_.kkt_residual;
  info.message = last_.message;
  const double lo = std::min(cfg_.tau_min, tau_driver);
  if (ok) {
    info.tau_wh = std::clamp(last_.trajectory.controls(0, 0), lo, tau_driver);
    info.eps_V0 = std::max(0.0, last_.trajectory.controls(1, 0));
    info.eps_alpha0 = std::max(0.0, last_.trajectory.controls(2, 0));
    have_warm_ = true;
  } else {
    info.fallback = true;
    info.tau_wh = std::max(std::min(tau_driver, 0.0), lo);
    have_warm_ = false;
  }
  info.allocation =
      allocate_torque(info.tau_wh, model_.vehicle, cfg_.motor_floor, cfg_.brake_front_share);
  return info;
}

}  // namespace pnmpc::braking
