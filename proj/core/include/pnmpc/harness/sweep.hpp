#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pnmpc/harness/log.hpp"
#include "pnmpc/harness/scenario.hpp"

namespace pnmpc::harness {

/// Grid of actuator delays x traction modes over one base scenario.
struct SweepSpec {
  ScenarioSpec base;
  std::vector<double> delays;  // s, applied to plant and controller alike
  std::vector<std::string> modes;  // preemptive, reactive, passive
  std::filesystem::path output_dir = "delay_sweep";
  double warmup = 0.5;  // s excluded from peak statistics
};

/// Keys: base (scenario file), delays_ms, modes, output_dir, warmup.
SweepSpec load_sweep(const std::filesystem::path& path);

struct SweepCell {
  std::string mode;
  double delay = 0.0;
  ScenarioResult result;
  double peak_sigma_FR = 0.0;
  double peak_sigma_FL = 0.0;
};

/// Runs every cell concurrently and writes `output_dir/summary.csv`
/// (mode, delay_ms, peak_sigma_FR, peak_sigma_FL, faulted, log) sorted by
/// mode then delay. Returns the cells in the same order.
std::vector<SweepCell> run_sweep(const SweepSpec& spec);

std::filesystem::path sweep_summary_path(const SweepSpec& spec);

/// Largest value of `column` with t >= t_min.
double peak_after(const LogTable& log, const std::string& column, double t_min);

}  // namespace pnmpc::harness
