#include "pnmpc/plant/delay_line.hpp"

#include <cmath>

#include "pnmpc/errors.hpp"

namespace pnmpc::plant {

DelayLine::DelayLine(double delay, double dt, double lag_T, double initial)
    : lag_T_(lag_T), y_(initial) {
  if (!(dt > 0.0)) throw ConfigError("delay line: dt must be > 0");
  if (!(delay >= 0.0)) throw ConfigError("delay line: delay must be >= 0");
  if (!(lag_T >= 0.0)) throw ConfigError("delay line: lag must be >= 0");
  depth_ = static_cast<std::size_t>(std::llround(delay / dt));
  buffer_.assign(depth_, initial);
}

double DelayLine::push_pop(double cmd, double dt) {
  buffer_.push_back(cmd);
  const double delayed = buffer_.front();
  buffer_.pop_front();
  if (lag_T_ <= 0.0) {
    y_ = delayed;
  } else {
    y_ += (1.0 - std::exp(-dt / lag_T_)) * (delayed - y_);
  }
  return y_;
}

void DelayLine::reset(double value) {
  buffer_.assign(depth_, value);
  y_ = value;
}

}  // namespace pnmpc::plant
