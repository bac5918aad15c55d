#include "pnmpc/preview/preview.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "pnmpc/errors.hpp"

namespace pnmpc::preview {

PathMap::PathMap(std::vector<double> breakpoints, std::vector<double> values, Interpolation interp)
    : s_(std::move(breakpoints)), v_(std::move(values)), interp_(interp) {
  if (s_.size() != v_.size()) throw ConfigError("path map: breakpoint/value count mismatch");
  if (s_.empty()) throw ConfigError("path map: no breakpoints");
  for (std::size_t i = 0; i < s_.size(); ++i) {
    if (!std::isfinite(s_[i]) || !std::isfinite(v_[i]))
      throw ConfigError("path map: non-finite entry at index " + std::to_string(i));
    if (i > 0 && !(s_[i] > s_[i - 1]))
      throw ConfigError("path map: breakpoints not strictly increasing at index " +
                        std::to_string(i));
  }
}

PathMap PathMap::constant(double value, Interpolation interp) {
  return PathMap({0.0}, {value}, interp);
}

PathMap PathMap::load(const std::filesystem::path& path, Interpolation interp) {
  std::ifstream in(path);
  if (!in) throw ValidationError({path.string() + ": cannot open map file"});
  std::vector<double> s, v;
  std::vector<std::string> problems;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b;
    if (!(row >> a)) {
      std::string rest;
      if (std::istringstream(line) >> rest)
        problems.push_back(path.string() + ":" + std::to_string(lineno) + ": not a number");
      continue;
    }
    std::string extra;
    if (!(row >> b) || (row >> extra)) {
      problems.push_back(path.string() + ":" + std::to_string(lineno) +
                         ": expected two columns (s, value)");
      continue;
    }
    if (!s.empty() && !(a > s.back()))
      problems.push_back(path.string() + ":" + std::to_string(lineno) +
                         ": distance not strictly increasing");
    s.push_back(a);
    v.push_back(b);
  }
  if (s.empty()) problems.push_back(path.string() + ": map has no rows");
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return PathMap(std::move(s), std::move(v), interp);
}

double PathMap::sample(double s) const {
  if (s_.empty()) throw ConfigError("path map is empty");
  if (s <= s_.front()) return v_.front();
  if (s >= s_.back()) return v_.back();
  // First breakpoint strictly greater than s.
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  const auto i = static_cast<std::size_t>(it - s_.begin());
  if (interp_ == Interpolation::hold) return v_[i - 1];
  const double w = (s - s_[i - 1]) / (s_[i] - s_[i - 1]);
  return v_[i - 1] + w * (v_[i] - v_[i - 1]);
}

void PathMap::validate_friction() const {
  for (std::size_t i = 0; i < v_.size(); ++i)
    if (!(v_[i] > 0.0 && v_[i] <= 1.2))
      throw ConfigError("friction map: value " + std::to_string(v_[i]) + " at s = " +
                        std::to_string(s_[i]) + " outside (0, 1.2]");
}

void PathMap::validate_curvature() const {
  for (std::size_t i = 0; i < v_.size(); ++i)
    if (!(std::abs(v_[i]) < 1.0))
      throw ConfigError("curvature map: |K| = " + std::to_string(std::abs(v_[i])) +
                        " at s = " + std::to_string(s_[i]) + " not below 1 1/m");
}

double sample_map(const PathMap& map, double s) { return map.sample(s); }

PreviewVector future_distances(double S, double V, int N, double Ts, double t0) {
  PreviewVector out;
  out.t0 = t0;
  out.values.resize(static_cast<std::size_t>(std::max(N, 0)) + 1);
  for (int n = 0; n <= N; ++n) out.values[static_cast<std::size_t>(n)] = S + V * n * Ts;
  return out;
}

double delay_advance(double V, double dt_delay) { return V * dt_delay; }

PreviewVector friction_preview(const PathMap& map, const PreviewVector& S_fut, double dx_delay,
                               PreviewMode mode) {
  PreviewVector out;
  out.t0 = S_fut.t0;
  out.values.resize(S_fut.size());
  if (mode == PreviewMode::reactive) {
    const double now = map.sample(S_fut.values.front());
    std::fill(out.values.begin(), out.values.end(), now);
    return out;
  }
  for (std::size_t n = 0; n < S_fut.size(); ++n) out.values[n] = map.sample(S_fut[n] + dx_delay);
  return out;
}

PreviewVector curvature_preview(const PathMap& map, const PreviewVector& S_fut) {
  PreviewVector out;
  out.t0 = S_fut.t0;
  out.values.resize(S_fut.size());
  for (std::size_t n = 0; n < S_fut.size(); ++n) out.values[n] = map.sample(S_fut[n]);
  return out;
}

double speed_limit(double mu, double K, double Fs, double V_veh_max) {
  const double k = std::abs(K);
  if (k == 0.0) return V_veh_max;
  return std::min(V_veh_max, std::sqrt(Fs * mu * kGravity / k));
}

}  // namespace pnmpc::preview
