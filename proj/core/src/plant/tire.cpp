#include "pnmpc/plant/tire.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pnmpc/errors.hpp"

namespace pnmpc::plant {

namespace {

struct Shape {
  double B, C, D, E;
};

Shape shape(const TireParams& p, TireAxis axis) {
  return axis == TireAxis::longitudinal ? Shape{p.Bx, p.Cx, p.Dx, p.Ex}
                                        : Shape{p.By, p.Cy, p.Dy, p.Ey};
}

double phi(const Shape& s, double slip) {
  const double bs = s.B * slip;
  return bs - s.E * (bs - std::atan(bs));
}

}  // namespace

void TireParams::validate() const {
  auto check = [](const char* axis, double B, double C, double D, double E) {
    if (!(B > 0.0)) throw ConfigError(std::string("tire ") + axis + ": B must be > 0");
    if (!(C > 1.0 && C <= 2.5)) throw ConfigError(std::string("tire ") + axis + ": C must be in (1, 2.5]");
    if (!(D > 0.5 && D <= 1.5)) throw ConfigError(std::string("tire ") + axis + ": D must be in (0.5, 1.5]");
    if (!(E < 1.0)) throw ConfigError(std::string("tire ") + axis + ": E must be < 1");
  };
  check("longitudinal", Bx, Cx, Dx, Ex);
  check("lateral", By, Cy, Dy, Ey);
  if (!(Fz0 > 0.0)) throw ConfigError("tire: Fz0 must be > 0");
}

double magic_formula(double slip, double mu, double Fz, const TireParams& p, TireAxis axis) {
  if (!(mu > 0.0) || !(Fz > 0.0)) return 0.0;
  const Shape s = shape(p, axis);
  // Odd by construction: evaluate on |slip| and restore the sign.
  const double mag = mu * Fz * s.D * std::sin(s.C * std::atan(phi(s, std::abs(slip))));
  return slip < 0.0 ? -mag : mag;
}

double peak_slip(const TireParams& p, TireAxis axis) {
  const Shape s = shape(p, axis);
  // sin peaks where C atan(phi) = pi/2; phi is increasing for E < 1.
  const double target = std::tan(std::numbers::pi / (2.0 * s.C));
  double lo = 0.0, hi = 1.0;
  while (phi(s, hi) < target) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(s, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TireForce combined_force(double slip_ratio, double slip_angle, double mu, double Fz,
                         const TireParams& p) {
  if (!(mu > 0.0) || !(Fz > 0.0)) return {};
  const double fx0 = magic_formula(slip_ratio, mu, Fz, p, TireAxis::longitudinal);
  const double fy0 = magic_formula(slip_angle, mu, Fz, p, TireAxis::lateral);
  const double rx = fx0 / (mu * Fz * p.Dx);
  const double ry = fy0 / (mu * Fz * p.Dy);
  return {fx0 * std::sqrt(std::max(0.0, 1.0 - ry * ry)),
          fy0 * std::sqrt(std::max(0.0, 1.0 - rx * rx))};
}

}  // namespace pnmpc::plant
