#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "pnmpc/braking/braking.hpp"
#include "pnmpc/errors.hpp"
#include "pnmpc/harness/plot_data.hpp"
#include "pnmpc/harness/scenario.hpp"
#include "pnmpc/harness/sweep.hpp"
#include "pnmpc/plant/params_io.hpp"
#include "pnmpc/traction/traction.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kRuntime = 3;

namespace h = pnmpc::harness;

void print_result(const h::ScenarioResult& r) {
  std::printf("log: %s\n", r.log.string().c_str());
  std::printf("steps: %ld  controller calls: %ld  fallbacks: %ld\n", r.steps, r.controller_calls,
              r.fallbacks);
  if (r.controller_calls > 0)
    std::printf("controller step: mean %.3f ms, max %.3f ms\n", r.mean_step_ms, r.max_step_ms);
  if (r.cone_hit) std::printf("cone hit: yes\n");
  if (r.faulted) std::printf("FAULT: %s\n", r.fault.c_str());
}

int cmd_run(const std::string& cfg, const std::string& output) {
  h::ScenarioSpec spec = h::load_scenario(cfg);
  if (!output.empty()) spec.output = output;
  const auto r = h::run_scenario(spec);
  print_result(r);
  return r.faulted ? kRuntime : kOk;
}

int cmd_sweep(const std::string& cfg, const std::string& output_dir) {
  h::SweepSpec spec = h::load_sweep(cfg);
  if (!output_dir.empty()) spec.output_dir = output_dir;
  const auto cells = h::run_sweep(spec);
  bool fault = false;
  for (const auto& c : cells) {
    std::printf("%-10s %5.0f ms  peak sigma_FR %.4f%s\n", c.mode.c_str(), c.delay * 1000.0,
                c.peak_sigma_FR, c.result.faulted ? "  FAULT" : "");
    fault = fault || c.result.faulted;
  }
  std::printf("summary: %s\n", h::sweep_summary_path(spec).string().c_str());
  return fault ? kRuntime : kOk;
}

int cmd_plotdata(const std::string& log, const std::string& figure, const std::string& out) {
  for (const auto& p : h::emit_plot_data(log, figure, out)) std::printf("%s\n", p.string().c_str());
  return kOk;
}

int cmd_validate(const std::string& path, std::string kind) {
  if (kind == "auto") {
    const auto cfg = pnmpc::KvConfig::load(path);
    if (cfg.has("base")) kind = "sweep";
    else if (cfg.has("vehicle") || cfg.has("scenario")) kind = "scenario";
    else if (cfg.has("mass") || cfg.has("wheel_radius")) kind = "vehicle";
    else if (cfg.has("alpha_R_max_deg") || cfg.has("mu_mode") || cfg.has("V_veh_max")) kind = "braking";
    else kind = "traction";
  }
  if (kind == "sweep") h::load_sweep(path);
  else if (kind == "scenario") h::load_scenario(path);
  else if (kind == "vehicle") pnmpc::plant::load_plant_params(path);
  else if (kind == "braking") pnmpc::braking::load_dt_config(path);
  else pnmpc::traction::load_traction_config(path);
  std::printf("%s: valid %s file\n", path.c_str(), kind.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pre-emptive NMPC traction and braking simulations"};
  app.require_subcommand(1);

  std::string cfg, output, log, figure, out_dir = ".", kind = "auto";

  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("config", cfg, "Scenario file")->required();
  run->add_option("-o,--output", output, "Log path (overrides the scenario)");

  auto* sweep = app.add_subcommand("sweep", "Run a delay sweep");
  sweep->add_option("config", cfg, "Sweep file")->required();
  sweep->add_option("-o,--output-dir", output, "Directory for cell logs and summary");

  auto* plot = app.add_subcommand("plotdata", "Extract per-panel CSVs from a log");
  plot->add_option("log", log, "Scenario log or sweep summary")->required();
  plot->add_option("--figure", figure, "fig3, fig4, fig5 or fig6")->required();
  plot->add_option("--out", out_dir, "Output directory");

  auto* validate = app.add_subcommand("validate", "Check a configuration file");
  validate->add_option("config", cfg, "Any configuration file")->required();
  validate->add_option("--kind", kind, "auto, scenario, sweep, vehicle, traction or braking")
      ->check(CLI::IsMember({"auto", "scenario", "sweep", "vehicle", "traction", "braking"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(cfg, output);
    if (*sweep) return cmd_sweep(cfg, output);
    if (*plot) return cmd_plotdata(log, figure, out_dir);
    if (*validate) return cmd_validate(cfg, kind);
  } catch (const pnmpc::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kValidation;
  } catch (const pnmpc::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime fault: %s\n", e.what());
    return kRuntime;
  }
  return kOk;
}
