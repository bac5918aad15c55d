#pragma once

#include <array>
#include <cmath>

#include "pnmpc/plant/tire.hpp"

namespace pnmpc::plant {

inline constexpr double kGravity = 9.81;
inline constexpr double kSlipSpeedEps = 0.5;  // m/s, slip denominators

enum Wheel : int { FL = 0, FR = 1, RL = 2, RR = 3 };
enum class DrivenAxle { front, rear };

using Quad = std::array<double, 4>;

struct VehicleParams {
  double m = 900.0;
  double Iz = 1100.0;
  double a = 1.0;  // CoG to front axle
  double b = 1.2;  // CoG to rear axle
  double tw_f = 1.4;
  double tw_r = 1.4;
  double h = 0.5;
  double R = 0.3;
  double Jw = 1.2;
  double gear_ratio = 8.0;
  double tau_m_max = 85.0;
  double drag_coeff = 0.4;
  double roll_res = 0.012;
  DrivenAxle driven_axle = DrivenAxle::front;
  double width = 1.5;   // body, for footprint checks
  double length = 3.0;

  double wheelbase() const { return a + b; }
  bool driven(int wheel) const {
    return driven_axle == DrivenAxle::front ? wheel < 2 : wheel >= 2;
  }
  void validate() const;

  static VehicleParams traction_default();
  static VehicleParams braking_default();
};

struct PlantState {
  double X = 0.0, Y = 0.0, psi = 0.0;
  double vx = 0.0, vy = 0.0, yaw_rate = 0.0;
  Quad omega{};
  double tau_m_actual = 0.0;
  double s_travel = 0.0;

  double speed() const { return std::hypot(vx, vy); }
  double sideslip() const { return std::atan2(vy, std::max(vx, 1e-3)); }
};

struct ActuatorInput {
  double tau_m_cmd = 0.0;
  Quad tau_brake{};
  double delta = 0.0;
};

/// Quasi-static loads: static a/b split, longitudinal transfer m ax h / L,
/// lateral transfer per axle in proportion to its static share.
/// `floor` clamps each load at zero.
Quad vertical_loads(double ax, double ay, const VehicleParams& p, bool floor = true);

inline Quad vertical_loads(const PlantState&, double ax, double ay, const VehicleParams& p) {
  return vertical_loads(ax, ay, p, true);
}

/// Wheel-centre quantities and forces for one evaluation of the chassis.
struct ChassisForces {
  Quad fz{}, slip_ratio{}, slip_angle{};
  Quad fx_wheel{}, fy_wheel{};  // wheel frame
  double Fx = 0.0, Fy = 0.0, Mz = 0.0;  // body frame totals
};

/// Tire forces of the double-track layout. Loads come from `passes`
/// fixed-point sweeps of ax = sum Fx / m, ay = sum Fy / m starting at
/// (ax0, ay0).
ChassisForces chassis_forces(double vx, double vy, double yaw_rate, const Quad& omega,
                             double delta, const Quad& mu, const VehicleParams& p,
                             const TireParams& t, int passes = 2, double ax0 = 0.0,
                             double ay0 = 0.0);

/// Drive torque at each wheel for a motor torque (open differential).
Quad drive_torques(double tau_motor, const VehicleParams& p);

/// Aerodynamic drag plus rolling resistance, opposing vx.
double resistance_force(double vx, const VehicleParams& p);

/// Slip ratio (omega R - v) / max(|omega R|, eps).
inline double slip_ratio(double omega, double v_long, double R) {
  const double wr = omega * R;
  return (wr - v_long) / std::max(std::abs(wr), kSlipSpeedEps);
}

}  // namespace pnmpc::plant
