#include "pnmpc/harness/path.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pnmpc/errors.hpp"

namespace pnmpc::harness {

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

IsoCourse::IsoCourse(double vehicle_width) : width(vehicle_width) {
  const double w1 = 1.1 * width + 0.25;
  const double w3 = width + 1.0;
  const double w5 = std::max(3.0, 1.3 * width + 0.25);
  entry = {0.0, 12.0, -0.5 * w1, 0.5 * w1};
  offset = {25.5, 36.5, 0.5 * w1 + 1.0, 0.5 * w1 + 1.0 + w3};
  exit = {49.0, 61.0, -0.5 * w1, -0.5 * w1 + w5};
}

ReferencePath::ReferencePath(std::vector<PathSample> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw ConfigError("reference path needs at least two samples");
  for (std::size_t i = 1; i < samples_.size(); ++i)
    if (!(samples_[i].s > samples_[i - 1].s))
      throw ConfigError("reference path arc length must increase");
}

ReferencePath ReferencePath::straight(double length, double x0, double ds) {
  std::vector<PathSample> out;
  const int n = static_cast<int>(std::ceil(length / ds));
  for (int i = 0; i <= n; ++i) {
    const double s = std::min(i * ds, length);
    out.push_back({s, x0 + s, 0.0, 0.0, 0.0});
  }
  return ReferencePath(std::move(out));
}

ReferencePath ReferencePath::u_turn(double straight, double radius, double ds) {
  std::vector<PathSample> out;
  const double arc = std::numbers::pi * radius;
  const double total = 2.0 * straight + arc;
  const int n = static_cast<int>(std::ceil(total / ds));
  for (int i = 0; i <= n; ++i) {
    const double s = std::min(i * ds, total);
    if (s < straight) {
      out.push_back({s, s, 0.0, 0.0, 0.0});
    } else if (s < straight + arc) {
      const double th = (s - straight) / radius;
      out.push_back({s, straight + radius * std::sin(th), radius * (1.0 - std::cos(th)), th,
                     1.0 / radius});
    } else {
      const double d = s - straight - arc;
      out.push_back({s, straight - d, 2.0 * radius, std::numbers::pi, 0.0});
    }
  }
  return ReferencePath(std::move(out));
}

namespace {

// Quintic blend 10u^3 - 15u^4 + 6u^5 and its first two derivatives in x.
struct Blend {
  double x0, x1, y0, y1;

  void eval(double x, double& y, double& dy, double& ddy) const {
    const double L = x1 - x0;
    const double u = std::clamp((x - x0) / L, 0.0, 1.0);
    const double dyl = y1 - y0;
    y = y0 + dyl * u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    dy = dyl * 30.0 * u * u * (1.0 - u) * (1.0 - u) / L;
    ddy = dyl * 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (L * L);
  }
};

}  // namespace

ReferencePath ReferencePath::iso3888(const IsoCourse& c, double approach, double exit_run,
                                     double dx) {
  const double y1 = 0.5 * (c.entry.y_lo + c.entry.y_hi);
  const double y3 = 0.5 * (c.offset.y_lo + c.offset.y_hi);
  const double y5 = 0.5 * (c.exit.y_lo + c.exit.y_hi);
  const Blend first{c.entry.x1 - 2.0, c.offset.x0 + 2.5, y1, y3};
  const Blend second{c.offset.x1 - 2.5, c.exit.x0 + 3.0, y3, y5};

  auto eval = [&](double x, double& y, double& dy, double& ddy) {
    if (x < second.x0) first.eval(x, y, dy, ddy);
    else second.eval(x, y, dy, ddy);
  };

  std::vector<PathSample> out;
  const double xa = -approach, xb = c.end_x() + exit_run;
  const int n = static_cast<int>(std::ceil((xb - xa) / dx));
  double s = 0.0, prev_x = xa, prev_y = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = std::min(xa + i * dx, xb);
    double y, dy, ddy;
    eval(x, y, dy, ddy);
    if (i > 0) s += std::hypot(x - prev_x, y - prev_y);
    out.push_back({s, x, y, std::atan(dy), ddy / std::pow(1.0 + dy * dy, 1.5)});
    prev_x = x;
    prev_y = y;
  }
  return ReferencePath(std::move(out));
}

std::size_t ReferencePath::segment(double s) const {
  auto it = std::upper_bound(samples_.begin(), samples_.end(), s,
                             [](double v, const PathSample& p) { return v < p.s; });
  const auto i = static_cast<std::size_t>(std::distance(samples_.begin(), it));
  return std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, samples_.size() - 2);
}

PathSample ReferencePath::at(double s) const {
  const std::size_t i = segment(s);
  const PathSample& a = samples_[i];
  const PathSample& b = samples_[i + 1];
  const double t = (s - a.s) / (b.s - a.s);
  if (t < 0.0 || t > 1.0) {
    const PathSample& e = t < 0.0 ? a : b;
    const double d = s - e.s;
    return {s, e.x + d * std::cos(e.heading), e.y + d * std::sin(e.heading), e.heading, 0.0};
  }
  return {s, a.x + t * (b.x - a.x), a.y + t * (b.y - a.y),
          a.heading + t * wrap_angle(b.heading - a.heading),
          a.curvature + t * (b.curvature - a.curvature)};
}

ReferencePath::Projection ReferencePath::project(double X, double Y, double psi,
                                                 double s_hint) const {
  const std::size_t nseg = samples_.size() - 1;
  auto search = [&](std::size_t lo, std::size_t hi, double& best_d2, double& best_s) {
    for (std::size_t i = lo; i < hi; ++i) {
      const PathSample& a = samples_[i];
      const PathSample& b = samples_[i + 1];
      const double ex = b.x - a.x, ey = b.y - a.y;
      const double len2 = ex * ex + ey * ey;
      double t = ((X - a.x) * ex + (Y - a.y) * ey) / len2;
      const double t_lo = i == 0 ? -1e9 : 0.0;
      const double t_hi = i + 1 == nseg ? 1e9 : 1.0;
      t = std::clamp(t, t_lo, t_hi);
      const double px = a.x + t * ex, py = a.y + t * ey;
      const double d2 = (X - px) * (X - px) + (Y - py) * (Y - py);
      if (d2 < best_d2) {
        best_d2 = d2;
        best_s = a.s + t * (b.s - a.s);
      }
    }
  };

  double best_d2 = 1e300, best_s = 0.0;
  const std::size_t centre = segment(s_hint);
  const std::size_t window = 400;
  search(centre > window ? centre - window : 0, std::min(nseg, centre + window), best_d2, best_s);
  if (best_d2 > 25.0) search(0, nseg, best_d2, best_s);

  Projection p;
  p.s = best_s;
  p.ref = at(best_s);
  const double dx = X - p.ref.x, dy = Y - p.ref.y;
  p.lateral = std::cos(p.ref.heading) * dy - std::sin(p.ref.heading) * dx;
  p.heading_error = wrap_angle(psi - p.ref.heading);
  return p;
}

preview::PathMap ReferencePath::curvature_map(double ds) const {
  std::vector<double> s, k;
  const double L = length();
  const int n = static_cast<int>(std::ceil(L / ds));
  for (int i = 0; i <= n; ++i) {
    const double si = std::min(i * ds, L);
    if (!s.empty() && si <= s.back()) continue;
    s.push_back(si);
    k.push_back(at(si).curvature);
  }
  return preview::PathMap(std::move(s), std::move(k), preview::Interpolation::linear);
}

}  // namespace pnmpc::harness
