#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "pnmpc/kv_config.hpp"
#include "pnmpc/ocp/solver.hpp"
#include "pnmpc/plant/vehicle.hpp"
#include "pnmpc/preview/preview.hpp"

namespace pnmpc::braking {

enum class MuMode { constant, variable };

struct DtNmpcConfig {
  int N = 17;
  double Ts = 0.2;
  double W_V = 10.0;
  double W_alpha = 50.0;
  double W_tau = 1e-5;  // on (tau_driver - tau_wh) / (gear tau_m_max)
  double alpha_R_max = 3.0 * 3.14159265358979323846 / 180.0;
  double tau_min = -900.0;  // N m at the wheels, motor plus brakes
  double V_veh_max = 40.0;
  double Fs = 0.9;
  MuMode mu_mode = MuMode::constant;
  double motor_floor = 0.0;       // lowest motor torque used before braking, N m
  double brake_front_share = 0.5;
  int sqp_iters = 2;

  double horizon() const { return N * Ts; }
  void validate() const;
};

/// Keys: N, Ts, alpha_R_max_deg, Fs, V_veh_max, tau_min, weights (V, alpha,
/// tau), mu_mode, motor_floor, brake_front_share, sqp_iters.
DtNmpcConfig read_dt_config(KvReader& reader, const DtNmpcConfig& defaults = {});
DtNmpcConfig load_dt_config(const std::filesystem::path& path);

struct DtState {
  double S = 0.0, V = 0.0, beta = 0.0, yaw_rate = 0.0;
  plant::Quad omega{};
};

struct DtControl {
  double tau_wh = 0.0;
  double eps_V = 0.0, eps_alpha = 0.0;
};

struct TorqueAllocation {
  double motor = 0.0;    // motor shaft torque
  plant::Quad brake{};  // friction brake torque per wheel, >= 0

  /// gear * motor - sum(brake).
  double wheel_total(const plant::VehicleParams& p) const;
};

/// Motor first down to `motor_floor`, the remainder on the friction brakes
/// with `front_share` on the front axle and equal left/right torques.
TorqueAllocation allocate_torque(double tau_wh, const plant::VehicleParams& p,
                                 double motor_floor = 0.0, double front_share = 0.5);

/// atan((V sin beta - r b) / max(V cos beta, v_eps)).
double rear_axle_slip_angle(double V, double beta, double yaw_rate, double b);

struct DtModel {
  plant::VehicleParams vehicle;
  plant::TireParams tires;
  double motor_floor = 0.0;
  double brake_front_share = 0.5;
};

/// d/dt of (S, V, beta, r, omega x4) with steering delta = (a + b) K_n.
std::array<double, 8> dt_prediction_dynamics(const DtState& x, const DtControl& u, double K_n,
                                             double mu, const DtModel& model);

struct DtStepInfo {
  double tau_wh = 0.0;
  TorqueAllocation allocation;
  ocp::SolveStatus status = ocp::SolveStatus::failed;
  int iterations = 0;
  double kkt = 0.0;
  bool fallback = false;
  std::string message;
  double V_max_fut0 = 0.0;
  double K0 = 0.0;
  double mu0 = 0.0;
  double eps_V0 = 0.0;
  double eps_alpha0 = 0.0;
};

class DtController {
 public:
  DtController(DtNmpcConfig cfg, plant::VehicleParams vehicle, plant::TireParams tires,
               ocp::SolverConfig solver = {});

  DtStepInfo step(const DtState& meas, double tau_driver, const preview::PathMap& curvature,
                  const preview::PathMap& mu_map);

  ocp::OcpProblem build_problem(const DtState& meas, double tau_driver,
                                const preview::PathMap& curvature,
                                const preview::PathMap& mu_map) const;

  void reset();
  const DtNmpcConfig& config() const { return cfg_; }
  DtNmpcConfig& config() { return cfg_; }
  const DtModel& model() const { return model_; }
  const ocp::SolveResult& last_result() const { return last_; }

 private:
  DtNmpcConfig cfg_;
  DtModel model_;
  ocp::SqpSolver solver_;
  ocp::SolveResult last_;
  bool have_warm_ = false;
};

inline DtStepInfo step_dt_controller(const DtState& meas, double tau_driver,
                                     const preview::PathMap& curvature,
                                     const preview::PathMap& mu_map, DtController& controller) {
  return controller.step(meas, tau_driver, curvature, mu_map);
}

}  // namespace pnmpc::braking
