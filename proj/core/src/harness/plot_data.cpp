#include "pnmpc/harness/plot_data.hpp"

#include <cmath>
#include <cstdio>

#include "pnmpc/errors.hpp"
#include "pnmpc/harness/log.hpp"

namespace pnmpc::harness {

std::vector<PlotPanel> figure_panels(const std::string& figure, bool sweep_summary) {
  if (figure == "fig3")
    return {{"fig3a_torques", "t", {"tau_driver", "tau_ctrl", "tau_m_actual"}},
            {"fig3b_speeds", "t", {"V", "wR_FL", "wR_FR"}},
            {"fig3c_slip", "t", {"sigma_FR", "sigma_FL"}}};
  if (figure == "fig4") {
    if (sweep_summary) return {{"fig4b_peak_slip", "delay_ms", {"mode", "peak_sigma_FR"}}};
    return {{"fig4a_slip", "t", {"sigma_FR"}}};
  }
  if (figure == "fig5")
    return {{"fig5a_path", "X", {"Y", "lateral_dev", "cone_hit"}},
            {"fig5b_speed", "X", {"V", "V_max_fut0"}},
            {"fig5c_sideslip", "X", {"beta", "alpha_R"}}};
  if (figure == "fig6")
    return {{"fig6a_speed", "path_s", {"V", "V_max_fut0"}},
            {"fig6b_torques", "path_s", {"tau_driver", "tau_ctrl", "tau_delivered"}},
            {"fig6c_brakes", "path_s", {"brake_FL", "brake_FR", "brake_RL", "brake_RR"}},
            {"fig6d_trajectory", "X", {"Y", "lateral_dev"}}};
  throw ConfigError("unknown figure '" + figure + "' (expected fig3, fig4, fig5 or fig6)");
}

std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& log_path,
                                                  const std::string& figure,
                                                  const std::filesystem::path& out_dir) {
  const LogTable log = read_log(log_path);
  const bool summary = log.has("delay_ms") && log.has("peak_sigma_FR");
  const auto panels = figure_panels(figure, summary);

  for (const auto& p : panels) {
    std::vector<std::string> missing;
    if (!log.has(p.x)) missing.push_back(p.x);
    for (const auto& c : p.y)
      if (!log.has(c)) missing.push_back(c);
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      throw ConfigError("panel " + p.name + ": log " + log_path.string() +
                        " lacks column(s) " + list);
    }
  }
  if (log.rows.empty()) throw ConfigError("log " + log_path.string() + " has no data rows");

  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& p : panels) {
    const auto file = out_dir / (p.name + ".csv");
    std::FILE* f = std::fopen(file.string().c_str(), "w");
    if (!f) throw ConfigError("cannot write " + file.string());
    std::fputs(p.x.c_str(), f);
    for (const auto& c : p.y) std::fprintf(f, ",%s", c.c_str());
    std::fputc('\n', f);
    std::vector<std::size_t> idx{log.index(p.x)};
    for (const auto& c : p.y) idx.push_back(log.index(c));
    for (std::size_t r = 0; r < log.rows.size(); ++r) {
      for (std::size_t j = 0; j < idx.size(); ++j) {
        if (j) std::fputc(',', f);
        const double v = log.rows[r][idx[j]];
        if (std::isnan(v)) std::fputs(log.text_cell(r, log.columns[idx[j]]).c_str(), f);
        else std::fprintf(f, "%.9g", v);
      }
      std::fputc('\n', f);
    }
    std::fclose(f);
    written.push_back(file);
  }
  return written;
}

}  // namespace pnmpc::harness
