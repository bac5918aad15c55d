#pragma once

namespace pnmpc::plant {

enum class TireAxis { longitudinal, lateral };

/// Simplified magic-formula coefficients, one set per axis.
struct TireParams {
  double Bx = 12.0, Cx = 1.65, Dx = 1.0, Ex = 0.0;
  double By = 10.0, Cy = 1.9, Dy = 1.0, Ey = 0.97;
  double Fz0 = 2400.0;  // nominal load, N

  /// Throws ConfigError on out-of-range shape factors.
  void validate() const;
};

/// F = mu Fz D sin(C atan(B s - E (B s - atan(B s)))).
double magic_formula(double slip, double mu, double Fz, const TireParams& p, TireAxis axis);

/// Slip at which |F| peaks (independent of mu and Fz for this form).
double peak_slip(const TireParams& p, TireAxis axis);

struct TireForce {
  double fx = 0.0;  // along the wheel heading
  double fy = 0.0;  // lateral, wheel frame
};

/// Pure-slip forces coupled by friction-ellipse scaling:
///   fx = fx0 sqrt(1 - (fy0/fy_max)^2),  fy = fy0 sqrt(1 - (fx0/fx_max)^2)
TireForce combined_force(double slip_ratio, double slip_angle, double mu, double Fz,
                         const TireParams& p);

}  // namespace pnmpc::plant
