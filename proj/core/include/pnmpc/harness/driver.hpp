#pragma once

#include "pnmpc/harness/path.hpp"
#include "pnmpc/plant/vehicle.hpp"

namespace pnmpc::harness {

enum class DriverKind { full_throttle, speed_pi };

struct DriverSpec {
  DriverKind kind = DriverKind::full_throttle;
  double target_speed = 0.0;  // m/s
  double speed_kp = 150.0;    // N m per m/s at the wheels
  double speed_ki = 60.0;
  double torque_min = -900.0;
  double torque_max = 1e300;  // clamped to the powertrain limit when built
  double coast_after_x = 1e300;  // zero torque request once X passes this
  // Steering: feedforward (a + b) K at s + lookahead, PI on lateral offset,
  // P on heading error.
  double steer_kp_lateral = 0.1;  // rad/m
  double steer_ki_lateral = 0.02;  // rad/(m s)
  double steer_kp_heading = 0.8;  // rad/rad
  double lookahead = 2.0;         // m
  double max_steer = 0.6;         // rad

  void validate() const;
};

/// Motor torque request equal to the motor limit.
double driver_full_throttle(const plant::VehicleParams& p);

/// Speed PI with conditional-integration anti-windup.
class SpeedPi {
 public:
  SpeedPi(double kp, double ki, double lo, double hi) : kp_(kp), ki_(ki), lo_(lo), hi_(hi) {}

  double update(double V, double V_target, double dt);
  double integrator() const { return integ_; }
  void reset() { integ_ = 0.0; }

 private:
  double kp_, ki_, lo_, hi_;
  double integ_ = 0.0;
};

inline double driver_speed_pi(SpeedPi& pi, double V, double V_target, double dt) {
  return pi.update(V, V_target, dt);
}

class PathTracker {
 public:
  PathTracker(const DriverSpec& spec, double wheelbase) : spec_(spec), L_(wheelbase) {}

  /// Steering angle for the given projection; `K_preview` is the path
  /// curvature at s + lookahead.
  double update(const ReferencePath::Projection& proj, double K_preview, double dt);
  void reset() { integ_ = 0.0; }

 private:
  DriverSpec spec_;
  double L_;
  double integ_ = 0.0;
};

double driver_path_tracking(PathTracker& tracker, const ReferencePath::Projection& proj,
                            double K_preview, double dt);

}  // namespace pnmpc::harness
