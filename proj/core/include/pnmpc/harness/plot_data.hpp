#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pnmpc::harness {

struct PlotPanel {
  std::string name;  // file stem, e.g. fig3a_torques
  std::string x;     // abscissa column
  std::vector<std::string> y;
};

/// Panels of fig3, fig4 (run log: slip profile; sweep summary: peaks),
/// fig5 and fig6. Throws ConfigError for an unknown figure.
std::vector<PlotPanel> figure_panels(const std::string& figure, bool sweep_summary = false);

/// Writes one CSV per panel into `out_dir` and returns the paths. Checks
/// every panel before writing anything: a missing column throws
/// ConfigError naming the panel, an empty log throws ConfigError.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& log,
                                                  const std::string& figure,
                                                  const std::filesystem::path& out_dir = ".");

}  // namespace pnmpc::harness
