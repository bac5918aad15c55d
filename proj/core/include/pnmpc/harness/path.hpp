#pragma once

#include <vector>

#include "pnmpc/preview/preview.hpp"

namespace pnmpc::harness {

struct PathSample {
  double s = 0.0, x = 0.0, y = 0.0, heading = 0.0, curvature = 0.0;
};

/// One cone-delimited gate of the obstacle course: the whole footprint must
/// stay within [y_lo, y_hi] while any part of it is inside [x0, x1].
struct Gate {
  double x0, x1, y_lo, y_hi;
};

/// ISO 3888-2 layout for a given vehicle width. Section lengths 12, 13.5, 11,
/// 12.5 and 12 m starting at X = 0; lanes 1, 3 and 5 are gated.
struct IsoCourse {
  double width = 1.3;
  Gate entry, offset, exit;

  explicit IsoCourse(double vehicle_width);
  double end_x() const { return exit.x1; }
  std::vector<Gate> gates() const { return {entry, offset, exit}; }
};

/// Densely sampled planar reference path, linear between samples and
/// extended along the end tangents.
class ReferencePath {
 public:
  ReferencePath() = default;
  explicit ReferencePath(std::vector<PathSample> samples);

  static ReferencePath straight(double length, double x0 = 0.0, double ds = 0.05);
  /// Straight, left-hand semicircle of `radius`, straight back.
  static ReferencePath u_turn(double straight, double radius, double ds = 0.05);
  /// Lane centreline through the course: quintic lane changes from
  /// `approach` metres before X = 0 to `exit_run` metres after the last gate.
  static ReferencePath iso3888(const IsoCourse& course, double approach, double exit_run,
                               double dx = 0.02);

  double length() const { return samples_.empty() ? 0.0 : samples_.back().s; }
  PathSample at(double s) const;

  struct Projection {
    double s = 0.0;
    double lateral = 0.0;        // left of the path is positive
    double heading_error = 0.0;  // psi - path heading, wrapped
    PathSample ref;
  };
  /// Closest point, searched around `s_hint` first.
  Projection project(double X, double Y, double psi, double s_hint) const;

  /// Linear curvature map sampled every `ds`.
  preview::PathMap curvature_map(double ds = 0.1) const;

  const std::vector<PathSample>& samples() const { return samples_; }

 private:
  std::size_t segment(double s) const;
  std::vector<PathSample> samples_;
};

double wrap_angle(double a);

}  // namespace pnmpc::harness
