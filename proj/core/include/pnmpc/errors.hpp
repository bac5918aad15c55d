#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pnmpc {

/// Bad dimensions, inconsistent bounds, empty maps, unknown keys.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dynamics evaluation produced NaN/Inf.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, int stage)
      : std::runtime_error(what + " (stage " + std::to_string(stage) + ")"), stage_(stage) {}
  int stage() const noexcept { return stage_; }

 private:
  int stage_;
};

/// The truth simulation diverged.
class SimulationFault : public std::runtime_error {
 public:
  SimulationFault(const std::string& what, long step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Aggregates every problem found while checking a configuration file.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out = "validation failed:";
    for (const auto& s : p) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> problems_;
};

}  // namespace pnmpc
