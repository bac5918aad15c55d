#include "pnmpc/harness/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>

#include "pnmpc/errors.hpp"

namespace pnmpc::harness {

SweepSpec load_sweep(const std::filesystem::path& path) {
  const KvConfig cfg = KvConfig::load(path);
  KvReader r(cfg);
  SweepSpec s;
  std::vector<std::string> nested;
  const std::string base = r.required_text("base");
  if (!base.empty()) {
    try {
      s.base = load_scenario(cfg.resolve(base));
    } catch (const ValidationError& e) {
      nested = e.problems();
    } catch (const std::exception& e) {
      nested.push_back(e.what());
    }
  }
  for (double ms : r.numbers("delays_ms", {0.0, 50.0, 100.0, 150.0})) {
    if (!(ms >= 0.0)) r.problem(cfg.source() + ": delays_ms entries must be >= 0");
    s.delays.push_back(ms / 1000.0);
  }
  const std::string modes = r.text("modes", "preemptive, reactive, passive");
  std::string cur;
  auto flush = [&] {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) {
      const std::string m = cur.substr(b, e - b + 1);
      if (m != "preemptive" && m != "reactive" && m != "passive")
        r.problem(cfg.source() + ": unknown mode '" + m + "' in 'modes'");
      s.modes.push_back(m);
    }
    cur.clear();
  };
  for (char c : modes) {
    if (c == ',') flush();
    else cur += c;
  }
  flush();
  s.output_dir = r.text("output_dir", "delay_sweep");
  s.warmup = r.number("warmup", s.warmup, 0.0, 1e4);
  for (auto& p : nested) r.problem(std::move(p));
  r.finish();
  if (s.base.controller != ControllerKind::traction)
    throw ValidationError({cfg.source() + ": sweep base must use the traction controller"});
  return s;
}

std::filesystem::path sweep_summary_path(const SweepSpec& spec) {
  return spec.output_dir / "summary.csv";
}

double peak_after(const LogTable& log, const std::string& column, double t_min) {
  const auto t = log.column("t");
  const auto v = log.column(column);
  double peak = -1e300;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (t[i] >= t_min) peak = std::max(peak, v[i]);
  return peak;
}

std::vector<SweepCell> run_sweep(const SweepSpec& spec) {
  std::vector<SweepCell> cells;
  for (const auto& mode : spec.modes)
    for (double d : spec.delays) cells.push_back({mode, d, {}, 0.0, 0.0});
  auto rank = [](const std::string& m) {
    return m == "preemptive" ? 0 : m == "reactive" ? 1 : 2;
  };
  std::sort(cells.begin(), cells.end(), [&](const SweepCell& a, const SweepCell& b) {
    return std::pair(rank(a.mode), a.delay) < std::pair(rank(b.mode), b.delay);
  });

  std::filesystem::create_directories(spec.output_dir);
  std::vector<std::future<void>> jobs;
  for (auto& cell : cells) {
    jobs.push_back(std::async(std::launch::async, [&spec, &cell] {
      ScenarioSpec s = spec.base;
      s.plant.actuator_delay = cell.delay;
      s.traction.dt_delay = cell.delay;
      s.passive = cell.mode == "passive";
      if (!s.passive)
        s.traction.mode = cell.mode == "preemptive" ? preview::PreviewMode::preemptive
                                                    : preview::PreviewMode::reactive;
      const long ms = std::lround(cell.delay * 1000.0);
      s.output = spec.output_dir / (cell.mode + "_" + std::to_string(ms) + "ms.csv");
      cell.result = run_scenario(s);
      const LogTable log = read_log(cell.result.log);
      cell.peak_sigma_FR = peak_after(log, "sigma_FR", spec.warmup);
      cell.peak_sigma_FL = peak_after(log, "sigma_FL", spec.warmup);
    }));
  }
  for (auto& j : jobs) j.get();

  const auto summary = sweep_summary_path(spec);
  std::FILE* f = std::fopen(summary.string().c_str(), "w");
  if (!f) throw ConfigError("cannot write " + summary.string());
  std::fprintf(f, "mode,delay_ms,peak_sigma_FR,peak_sigma_FL,faulted,log\n");
  for (const auto& c : cells)
    std::fprintf(f, "%s,%.9g,%.9g,%.9g,%d,%s\n", c.mode.c_str(), c.delay * 1000.0,
                 c.peak_sigma_FR, c.peak_sigma_FL, c.result.faulted ? 1 : 0,
                 c.result.log.filename().string().c_str());
  std::fclose(f);
  return cells;
}

}  // namespace pnmpc::harness
