#include "pnmpc/harness/driver.hpp"

#include <algorithm>
#include <cmath>

#include "pnmpc/errors.hpp"

namespace pnmpc::harness {

void DriverSpec::validate() const {
  std::vector<std::string> bad;
  auto nonneg = [&](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) bad.push_back(std::string(name) + " must be >= 0");
  };
  nonneg(speed_kp, "speed_kp");
  nonneg(speed_ki, "speed_ki");
  nonneg(steer_kp_lateral, "steer_kp_lateral");
  nonneg(steer_ki_lateral, "steer_ki_lateral");
  nonneg(steer_kp_heading, "steer_kp_heading");
  nonneg(lookahead, "lookahead");
  nonneg(target_speed, "target_speed");
  if (!(torque_min <= 0.0 && torque_max >= 0.0)) bad.push_back("driver torque range must contain 0");
  if (!(max_steer > 0.0)) bad.push_back("max_steer must be > 0");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

double driver_full_throttle(const plant::VehicleParams& p) { return p.tau_m_max; }

double SpeedPi::update(double V, double V_target, double dt) {
  const double e = V_target - V;
  const double trial = integ_ + ki_ * e * dt;
  const double u = kp_ * e + trial;
  // Integrate only while unsaturated or when the error unwinds saturation.
  if ((u <= hi_ && u >= lo_) || (u > hi_ && e < 0.0) || (u < lo_ && e > 0.0)) integ_ = trial;
  integ_ = std::clamp(integ_, lo_, hi_);
  return std::clamp(kp_ * e + integ_, lo_, hi_);
}

double PathTracker::update(const ReferencePath::Projection& proj, double K_preview, double dt) {
  integ_ += proj.lateral * dt;
  if (spec_.steer_ki_lateral > 0.0) {
    const double cap = spec_.max_steer / spec_.steer_ki_lateral;
    integ_ = std::clamp(integ_, -cap, cap);
  }
  const double delta = L_ * K_preview - spec_.steer_kp_lateral * proj.lateral -
                       spec_.steer_ki_lateral * integ_ - spec_.steer_kp_heading * proj.heading_error;
  return std::clamp(delta, -spec_.max_steer, spec_.max_steer);
}

double driver_path_tracking(PathTracker& tracker, const ReferencePath::Projection& proj,
                            double K_preview, double dt) {
  return tracker.update(proj, K_preview, dt);
}

}  // namespace pnmpc::harness
