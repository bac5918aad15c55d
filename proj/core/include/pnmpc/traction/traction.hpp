#pragma once

#include <array>
#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "pnmpc/kv_config.hpp"
#include "pnmpc/ocp/solver.hpp"
#include "pnmpc/plant/vehicle.hpp"
#include "pnmpc/preview/preview.hpp"

namespace pnmpc::traction {

struct TractionNmpcConfig {
  int N = 10;
  double Ts = 0.025;
  double W_slack_FL = 1e3;
  double W_slack_FR = 1e3;
  double W_tau = 1e-4;  // on (tau_driver - tau_mod) / tau_m_max
  double dt_delay = 0.1;
  preview::PreviewMode mode = preview::PreviewMode::preemptive;
  double T_m = 0.02;
  double slip_margin = 0.4;
  int sqp_iters = 2;
  double internal_step = 0.0025;  // RK4 step inside one Ts
  // Start the horizon from the state predicted through the commands still
  // in the actuator delay (friction along the way per mode).
  bool delay_prediction = true;

  double horizon() const { return N * Ts; }
  void validate() const;
};

/// Keys: mode, N, Ts, dt_delay, weights (slack FL, slack FR, tau), T_m,
/// slip_margin, sqp_iters, internal_step, delay_prediction.
TractionNmpcConfig read_traction_config(KvReader& reader, const TractionNmpcConfig& defaults = {});
TractionNmpcConfig load_traction_config(const std::filesystem::path& path);

struct TractionState {
  double tau_m = 0.0;
  double s_FL = 0.0, s_FR = 0.0;  // omega R - V
  double omega_FL = 0.0, omega_FR = 0.0;
};

struct TractionControl {
  double tau_m_mod = 0.0;
  double eps_FL = 0.0, eps_FR = 0.0;
};

/// Grid of margin * argmax_sigma F(sigma, mu, Fz) with bilinear lookup.
class ReferenceSlipTable {
 public:
  ReferenceSlipTable() = default;
  ReferenceSlipTable(std::vector<double> mu_grid, std::vector<double> fz_grid,
                     std::vector<double> values, double margin);

  static ReferenceSlipTable build(const plant::TireParams& tires, double margin,
                                  std::vector<double> mu_grid = {0.05, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2},
                                  std::vector<double> fz_grid = {500, 1000, 2000, 3000, 4000, 6000});

  /// Clamps to the grid; `clamped` reports whether that happened.
  double lookup(double mu, double Fz, bool* clamped = nullptr) const;

  const std::vector<double>& mu_grid() const { return mu_; }
  const std::vector<double>& fz_grid() const { return fz_; }
  double value(std::size_t i_mu, std::size_t i_fz) const { return v_[i_mu * fz_.size() + i_fz]; }
  double margin() const { return margin_; }

 private:
  std::vector<double> mu_, fz_, v_;
  double margin_ = 0.0;
};

double reference_slip(double mu, double Fz, const ReferenceSlipTable& table,
                      bool* clamped = nullptr);

/// sigma_ref - s / max(omega R, v_eps).
double slip_error(double sigma_ref, double s, double omega, double R);

struct TractionModel {
  plant::VehicleParams vehicle;
  plant::TireParams tires;
  double T_m = 0.02;
};

/// d/dt of (tau_m, s_FL, s_FR, omega_FL, omega_FR).
std::array<double, 5> prediction_dynamics(const TractionState& x, const TractionControl& u,
                                          double mu_n, const std::array<double, 2>& Fz,
                                          const TractionModel& model);

struct TractionMeasurement {
  TractionState x;
  double V = 0.0;
  double Fz_FL = 0.0, Fz_FR = 0.0;
};

struct TractionStepInfo {
  double tau_m_mod = 0.0;
  ocp::SolveStatus status = ocp::SolveStatus::failed;
  int iterations = 0;
  double kkt = 0.0;
  bool fallback = false;
  std::string message;
  double mu_now = 0.0;
  double sigma_ref = 0.0;
};

/// Receding-horizon traction controller; keeps its warm start between calls.
class TractionController {
 public:
  TractionController(TractionNmpcConfig cfg, plant::VehicleParams vehicle,
                     plant::TireParams tires, ocp::SolverConfig solver = {});

  /// `S` is the distance of the driven (front) axle along the map.
  TractionStepInfo step(const TractionMeasurement& meas, double tau_driver,
                        const preview::PathMap& mu_map, double S);

  void reset();

  /// Measurement advanced over round(dt_delay / Ts) periods with the
  /// commands issued but not yet delivered.
  TractionMeasurement predict_delay(const TractionMeasurement& meas,
                                    const preview::PathMap& mu_map, double S) const;
  std::size_t delay_steps() const;

  const TractionNmpcConfig& config() const { return cfg_; }
  const ReferenceSlipTable& table() const { return table_; }
  const ocp::SolveResult& last_result() const { return last_; }
  ocp::OcpProblem build_problem(const TractionMeasurement& meas, double tau_driver,
                                const preview::PathMap& mu_map, double S) const;

 private:
  TractionNmpcConfig cfg_;
  TractionModel model_;
  ReferenceSlipTable table_;
  ocp::SqpSolver solver_;
  ocp::SolveResult last_;
  bool have_warm_ = false;
  double prev_cmd_ = 0.0;
  std::deque<double> pending_;
};

inline TractionStepInfo step_traction_controller(const TractionMeasurement& meas,
                                                 double tau_driver, const preview::PathMap& map,
                                                 double S, TractionController& controller) {
  return controller.step(meas, tau_driver, map, S);
}

}  // namespace pnmpc::traction
