#pragma once

#include "pnmpc/plant/delay_line.hpp"
#include "pnmpc/plant/vehicle.hpp"

namespace pnmpc::plant {

/// Time derivative of the truth state for a delivered motor torque.
struct PlantDerivative {
  double X, Y, psi, vx, vy, yaw_rate;
  Quad omega;
  double s_travel;
};

PlantDerivative plant_derivative(const PlantState& x, double tau_motor, const ActuatorInput& in,
                                 const Quad& mu, const VehicleParams& p, const TireParams& t);

/// One RK4 step of length dt with the motor torque held at `tau_motor`.
PlantState integrate_plant(const PlantState& x, double tau_motor, const ActuatorInput& in,
                           const Quad& mu, double dt, const VehicleParams& p,
                           const TireParams& t);

/// Pushes the (clamped) motor command through the delay line, then steps.
/// Throws SimulationFault if the state becomes non-finite.
PlantState plant_step(const PlantState& x, const ActuatorInput& in, const Quad& mu_at_wheel,
                      double dt, const VehicleParams& p, const TireParams& t, DelayLine& line,
                      long step_index = 0);

/// Body-frame acceleration (vdot - r v terms removed) implied by a state.
struct Acceleration {
  double ax, ay;
};
Acceleration body_acceleration(const PlantState& x, double tau_motor, const ActuatorInput& in,
                               const Quad& mu, const VehicleParams& p, const TireParams& t);

}  // namespace pnmpc::plant
