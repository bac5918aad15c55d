#pragma once

#include <cstddef>
#include <deque>

namespace pnmpc::plant {

/// Pure transport delay of round(delay / dt) samples followed by a
/// first-order lag.
class DelayLine {
 public:
  DelayLine() = default;
  DelayLine(double delay, double dt, double lag_T, double initial = 0.0);

  double push_pop(double cmd, double dt);

  std::size_t depth() const { return depth_; }
  double lag_T() const { return lag_T_; }
  double output() const { return y_; }
  void reset(double value);

 private:
  std::deque<double> buffer_;
  std::size_t depth_ = 0;
  double lag_T_ = 0.0;
  double y_ = 0.0;
};

inline double delay_push_pop(DelayLine& line, double cmd, double dt) {
  return line.push_pop(cmd, dt);
}

}  // namespace pnmpc::plant
