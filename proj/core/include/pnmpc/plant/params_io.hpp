#pragma once

#include <filesystem>
#include <ostream>

#include "pnmpc/kv_config.hpp"
#include "pnmpc/plant/vehicle.hpp"

namespace pnmpc::plant {

/// Everything stored in a vehicle parameter file.
struct PlantParams {
  VehicleParams vehicle;
  TireParams tires;
  double actuator_delay = 0.1;  // s
  double actuator_lag = 0.02;   // s
};

/// Keys (SI units): mass, yaw_inertia, cg_to_front, cg_to_rear, track_front,
/// track_rear, cg_height, wheel_radius, wheel_inertia, gear_ratio,
/// motor_torque_max, drag_coeff, rolling_resistance, driven_axle,
/// body_width, body_length, tire_{Bx,Cx,Dx,Ex,By,Cy,Dy,Ey,Fz0},
/// actuator_delay, actuator_lag. Missing keys keep `defaults`.
PlantParams read_plant_params(KvReader& reader, const PlantParams& defaults = {});
PlantParams load_plant_params(const std::filesystem::path& path);
void write_plant_params(std::ostream& out, const PlantParams& params);

}  // namespace pnmpc::plant
