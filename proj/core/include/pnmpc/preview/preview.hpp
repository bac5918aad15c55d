#pragma once

#include <filesystem>
#include <vector>

namespace pnmpc::preview {

enum class Interpolation { hold, linear };

/// Scalar map indexed by travelled distance.
class PathMap {
 public:
  PathMap() = default;
  /// Throws ConfigError unless sizes match and breakpoints strictly increase.
  PathMap(std::vector<double> breakpoints, std::vector<double> values, Interpolation interp);

  static PathMap constant(double value, Interpolation interp = Interpolation::hold);

  /// Two-column text file (s in metres, value); '#' starts a comment.
  /// Throws ValidationError listing every bad line.
  static PathMap load(const std::filesystem::path& path, Interpolation interp);

  double sample(double s) const;

  bool empty() const { return s_.empty(); }
  const std::vector<double>& breakpoints() const { return s_; }
  const std::vector<double>& values() const { return v_; }
  Interpolation interpolation() const { return interp_; }

  /// Range checks for friction (0, 1.2] and curvature |K| < 1 maps.
  void validate_friction() const;
  void validate_curvature() const;

 private:
  std::vector<double> s_;
  std::vector<double> v_;
  Interpolation interp_ = Interpolation::hold;
};

/// Throws ConfigError on an empty map.
double sample_map(const PathMap& map, double s);

/// N+1 values aligned with the prediction time grid.
struct PreviewVector {
  std::vector<double> values;
  double t0 = 0.0;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// S + V n Ts for n = 0..N.
PreviewVector future_distances(double S, double V, int N, double Ts, double t0 = 0.0);

/// V dt_delay.
double delay_advance(double V, double dt_delay);

enum class PreviewMode { preemptive, reactive };

PreviewVector friction_preview(const PathMap& map, const PreviewVector& S_fut, double dx_delay,
                               PreviewMode mode);

PreviewVector curvature_preview(const PathMap& map, const PreviewVector& S_fut);

inline constexpr double kGravity = 9.81;

/// min(V_veh_max, sqrt(Fs mu g / |K|)).
double speed_limit(double mu, double K, double Fs, double V_veh_max);

}  // namespace pnmpc::preview
