#include "pnmpc/plant/vehicle.hpp"

#include <algorithm>
#include <string>

#include "pnmpc/errors.hpp"

namespace pnmpc::plant {

void VehicleParams::validate() const {
  const std::pair<const char*, double> positive[] = {
      {"mass", m},          {"yaw_inertia", Iz},   {"cg_to_front", a},
      {"cg_to_rear", b},    {"track_front", tw_f}, {"track_rear", tw_r},
      {"cg_height", h},     {"wheel_radius", R},   {"wheel_inertia", Jw},
      {"gear_ratio", gear_ratio}, {"motor_torque_max", tau_m_max},
      {"body_width", width}, {"body_length", length}};
  for (const auto& [name, v] : positive)
    if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be > 0");
  if (!(drag_coeff >= 0.0)) throw ConfigError("drag_coeff must be >= 0");
  if (!(roll_res >= 0.0)) throw ConfigError("rolling_resistance must be >= 0");
}

VehicleParams VehicleParams::traction_default() { return VehicleParams{}; }

VehicleParams VehicleParams::braking_default() {
  VehicleParams p;
  p.m = 550.0;
  p.Iz = 400.0;
  p.a = 0.95;
  p.b = 0.75;
  p.tw_f = 1.1;
  p.tw_r = 1.1;
  p.h = 0.5;
  p.R = 0.28;
  p.Jw = 0.6;
  p.gear_ratio = 9.23;
  p.tau_m_max = 57.0;
  p.drag_coeff = 0.55;
  p.roll_res = 0.012;
  p.driven_axle = DrivenAxle::rear;
  p.width = 1.3;
  p.length = 2.5;
  return p;
}

Quad vertical_loads(double ax, double ay, const VehicleParams& p, bool floor) {
  const double L = p.wheelbase();
  const double front_static = p.m * kGravity * p.b / L;
  const double rear_static = p.m * kGravity * p.a / L;
  const double dlong = p.m * ax * p.h / L;
  const double dlat_f = p.m * ay * p.h * (p.b / L) / p.tw_f;
  const double dlat_r = p.m * ay * p.h * (p.a / L) / p.tw_r;
  Quad fz{0.5 * (front_static - dlong) - dlat_f, 0.5 * (front_static - dlong) + dlat_f,
          0.5 * (rear_static + dlong) - dlat_r, 0.5 * (rear_static + dlong) + dlat_r};
  if (floor)
    for (double& f : fz) f = std::max(f, 0.0);
  return fz;
}

Quad drive_torques(double tau_motor, const VehicleParams& p) {
  const double per_wheel = 0.5 * tau_motor * p.gear_ratio;
  Quad t{};
  for (int i = 0; i < 4; ++i) t[i] = p.driven(i) ? per_wheel : 0.0;
  return t;
}

double resistance_force(double vx, const VehicleParams& p) {
  return p.drag_coeff * vx * std::abs(vx) + p.roll_res * p.m * kGravity * std::tanh(vx / 0.1);
}

ChassisForces chassis_forces(double vx, double vy, double yaw_rate, const Quad& omega,
                             double delta, const Quad& mu, const VehicleParams& p,
                             const TireParams& t, int passes, double ax0, double ay0) {
  const double xs[4] = {p.a, p.a, -p.b, -p.b};
  const double ys[4] = {0.5 * p.tw_f, -0.5 * p.tw_f, 0.5 * p.tw_r, -0.5 * p.tw_r};
  const double cd = std::cos(delta), sd = std::sin(delta);

  ChassisForces out;
  Quad vl{};
  for (int i = 0; i < 4; ++i) {
    const double vxi = vx - yaw_rate * ys[i];
    const double vyi = vy + yaw_rate * xs[i];
    const double c = i < 2 ? cd : 1.0;
    const double s = i < 2 ? sd : 0.0;
    vl[i] = vxi * c + vyi * s;
    const double vt = -vxi * s + vyi * c;
    out.slip_ratio[i] = slip_ratio(omega[i], vl[i], p.R);
    out.slip_angle[i] = -std::atan(vt / std::max(std::abs(vl[i]), kSlipSpeedEps));
  }

  double ax = ax0, ay = ay0;
  for (int pass = 0; pass < std::max(1, passes); ++pass) {
    out.fz = vertical_loads(ax, ay, p, true);
    out.Fx = out.Fy = out.Mz = 0.0;
    for (int i = 0; i < 4; ++i) {
      const TireForce f = combined_force(out.slip_ratio[i], out.slip_angle[i], mu[i], out.fz[i], t);
      out.fx_wheel[i] = f.fx;
      out.fy_wheel[i] = f.fy;
      const double c = i < 2 ? cd : 1.0;
      const double s = i < 2 ? sd : 0.0;
      const double fxb = f.fx * c - f.fy * s;
      const double fyb = f.fx * s + f.fy * c;
      out.Fx += fxb;
      out.Fy += fyb;
      out.Mz += xs[i] * fyb - ys[i] * fxb;
    }
    ax = out.Fx / p.m;
    ay = out.Fy / p.m;
  }
  return out;
}

}  // namespace pnmpc::plant
