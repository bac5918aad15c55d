#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "pnmpc/braking/braking.hpp"
#include "pnmpc/harness/driver.hpp"
#include "pnmpc/harness/path.hpp"
#include "pnmpc/plant/params_io.hpp"
#include "pnmpc/preview/preview.hpp"
#include "pnmpc/traction/traction.hpp"

namespace pnmpc::harness {

enum class ScenarioKind { friction_step, delay_sweep, iso3888, u_turn, custom };
enum class PathKind { straight, u_turn, iso3888 };
enum class ControllerKind { traction, braking };

std::string to_string(ScenarioKind k);

/// A fully resolved scenario: every referenced file is already loaded.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::custom;
  std::filesystem::path source;

  plant::PlantParams plant;
  ControllerKind controller = ControllerKind::traction;
  traction::TractionNmpcConfig traction;
  braking::DtNmpcConfig braking;
  bool passive = false;  // controller bypassed, driver request applied directly

  preview::PathMap friction = preview::PathMap::constant(1.0);

  PathKind path = PathKind::straight;
  double path_length = 300.0;     // straight
  double uturn_straight = 40.0;
  double uturn_radius = 10.0;
  double iso_approach = 80.0;
  double iso_exit_run = 25.0;

  DriverSpec driver;
  double duration = 10.0;
  double dt = 0.001;
  double initial_speed = 0.0;
  double off_path_limit = 10.0;
  double speed_noise = 0.0;  // std dev on measured speeds, m/s
  std::uint64_t seed = 0;

  std::filesystem::path output = "scenario.csv";

  double control_period() const;
  long control_every() const;  // plant steps per controller call
};

/// Reads a scenario file. Paths inside are relative to the file. Keys with a
/// `controller.` or `vehicle.` prefix override entries of the referenced
/// files. Throws ValidationError listing every bad key.
ScenarioSpec load_scenario(const std::filesystem::path& path);
ScenarioSpec read_scenario(const KvConfig& cfg);

/// Cross-checks that need the resolved spec; throws ValidationError.
void validate_scenario(const ScenarioSpec& spec);

ReferencePath build_path(const ScenarioSpec& spec);

struct ScenarioResult {
  std::filesystem::path log;
  bool faulted = false;
  std::string fault;
  long steps = 0;
  long controller_calls = 0;
  long fallbacks = 0;
  bool cone_hit = false;
  bool completed = false;  // reached the end of the path
  double mean_step_ms = 0.0;  // controller wall time, not logged
  double max_step_ms = 0.0;
};

/// Co-simulation: plant every dt, driver and controller every control
/// period with zero-order hold. Runtime faults end the log with a FAULT row
/// and set `faulted`; nothing is thrown for them.
ScenarioResult run_scenario(const ScenarioSpec& spec);

/// True if any footprint corner lies outside a gate it is inside of.
bool footprint_hits_gate(double X, double Y, double psi, double length, double width,
                         const IsoCourse& course);

}  // namespace pnmpc::harness
