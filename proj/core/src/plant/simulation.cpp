#include "pnmpc/plant/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "pnmpc/errors.hpp"

namespace pnmpc::plant {

namespace {

PlantState advance(const PlantState& x, const PlantDerivative& d, double h) {
  PlantState y = x;
  y.X += h * d.X;
  y.Y += h * d.Y;
  y.psi += h * d.psi;
  y.vx += h * d.vx;
  y.vy += h * d.vy;
  y.yaw_rate += h * d.yaw_rate;
  for (int i = 0; i < 4; ++i) y.omega[i] += h * d.omega[i];
  y.s_travel += h * d.s_travel;
  return y;
}

bool finite(const PlantState& x) {
  bool ok = std::isfinite(x.X) && std::isfinite(x.Y) && std::isfinite(x.psi) &&
            std::isfinite(x.vx) && std::isfinite(x.vy) && std::isfinite(x.yaw_rate) &&
            std::isfinite(x.tau_m_actual) && std::isfinite(x.s_travel);
  for (double w : x.omega) ok = ok && std::isfinite(w);
  return ok;
}

}  // namespace

PlantDerivative plant_derivative(const PlantState& x, double tau_motor, const ActuatorInput& in,
                                 const Quad& mu, const VehicleParams& p, const TireParams& t) {
  const ChassisForces f = chassis_forces(x.vx, x.vy, x.yaw_rate, x.omega, in.delta, mu, p, t);
  const Quad drive = drive_torques(tau_motor, p);
  const double cpsi = std::cos(x.psi), spsi = std::sin(x.psi);

  PlantDerivative d{};
  d.X = x.vx * cpsi - x.vy * spsi;
  d.Y = x.vx * spsi + x.vy * cpsi;
  d.psi = x.yaw_rate;
  d.vx = (f.Fx - resistance_force(x.vx, p)) / p.m + x.yaw_rate * x.vy;
  d.vy = f.Fy / p.m - x.yaw_rate * x.vx;
  d.yaw_rate = f.Mz / p.Iz;
  for (int i = 0; i < 4; ++i) {
    const double brake = in.tau_brake[i] * std::tanh(x.omega[i] / 0.1);
    d.omega[i] = (drive[i] - brake - f.fx_wheel[i] * p.R) / p.Jw;
  }
  d.s_travel = x.speed();
  return d;
}

PlantState integrate_plant(const PlantState& x, double tau_motor, const ActuatorInput& in,
                           const Quad& mu, double dt, const VehicleParams& p,
                           const TireParams& t) {
  const auto k1 = plant_derivative(x, tau_motor, in, mu, p, t);
  const auto k2 = plant_derivative(advance(x, k1, 0.5 * dt), tau_motor, in, mu, p, t);
  const auto k3 = plant_derivative(advance(x, k2, 0.5 * dt), tau_motor, in, mu, p, t);
  const auto k4 = plant_derivative(advance(x, k3, dt), tau_motor, in, mu, p, t);

  PlantDerivative sum{};
  sum.X = k1.X + 2.0 * k2.X + 2.0 * k3.X + k4.X;
  sum.Y = k1.Y + 2.0 * k2.Y + 2.0 * k3.Y + k4.Y;
  sum.psi = k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi;
  sum.vx = k1.vx + 2.0 * k2.vx + 2.0 * k3.vx + k4.vx;
  sum.vy = k1.vy + 2.0 * k2.vy + 2.0 * k3.vy + k4.vy;
  sum.yaw_rate = k1.yaw_rate + 2.0 * k2.yaw_rate + 2.0 * k3.yaw_rate + k4.yaw_rate;
  for (int i = 0; i < 4; ++i)
    sum.omega[i] = k1.omega[i] + 2.0 * k2.omega[i] + 2.0 * k3.omega[i] + k4.omega[i];
  sum.s_travel = k1.s_travel + 2.0 * k2.s_travel + 2.0 * k3.s_travel + k4.s_travel;
  PlantState y = advance(x, sum, dt / 6.0);
  y.tau_m_actual = tau_motor;
  return y;
}

PlantState plant_step(const PlantState& x, const ActuatorInput& in, const Quad& mu_at_wheel,
                      double dt, const VehicleParams& p, const TireParams& t, DelayLine& line,
                      long step_index) {
  const double cmd = std::clamp(in.tau_m_cmd, -p.tau_m_max, p.tau_m_max);
  const double delivered = line.push_pop(cmd, dt);
  PlantState y = integrate_plant(x, delivered, in, mu_at_wheel, dt, p, t);
  if (!finite(y)) throw SimulationFault("non-finite plant state", step_index);
  return y;
}

Acceleration body_acceleration(const PlantState& x, double tau_motor, const ActuatorInput& in,
                               const Quad& mu, const VehicleParams& p, const TireParams& t) {
  const auto d = plant_derivative(x, tau_motor, in, mu, p, t);
  return {d.vx - x.yaw_rate * x.vy, d.vy + x.yaw_rate * x.vx};
}

}  // namespace pnmpc::plant
