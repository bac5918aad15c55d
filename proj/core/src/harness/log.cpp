#include "pnmpc/harness/log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pnmpc/errors.hpp"

namespace pnmpc::harness {

const std::vector<std::string>& log_columns() {
  static const std::vector<std::string> cols = {
      "t",          "X",          "Y",          "psi",         "vx",          "vy",
      "yaw_rate",   "omega_FL",   "omega_FR",   "omega_RL",    "omega_RR",    "wR_FL",
      "wR_FR",      "wR_RL",      "wR_RR",      "tau_m_actual",
      "s_travel",   "path_s",     "lateral_dev", "V",          "beta",        "alpha_R",
      "sigma_FL",   "sigma_FR",   "sigma_RL",   "sigma_RR",    "delta",       "tau_driver",
      "tau_ctrl",   "tau_m_cmd",  "tau_delivered", "brake_FL", "brake_FR",    "brake_RL",
      "brake_RR",   "mu",         "K",          "V_max_fut0",  "eps_V",       "eps_alpha",
      "sigma_ref",  "solver_iter", "solver_kkt", "solver_status", "fallback",  "cone_hit"};
  return cols;
}

LogWriter::LogWriter(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  f_ = std::fopen(path.string().c_str(), "w");
  if (!f_) throw ConfigError("cannot open log file " + path.string());
  const auto& cols = log_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) std::fputc(',', f_);
    std::fputs(cols[i].c_str(), f_);
  }
  std::fputc('\n', f_);
}

LogWriter::~LogWriter() { close(); }

void LogWriter::row(const std::vector<double>& values) {
  line_.clear();
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line_ += ',';
    double v = values[i];
    if (v == 0.0) v = 0.0;  // no "-0"
    std::snprintf(buf, sizeof buf, "%.9g", v);
    line_ += buf;
  }
  line_ += '\n';
  std::fputs(line_.c_str(), f_);
}

void LogWriter::fault(long step, const std::string& message) {
  std::string clean = message;
  for (char& c : clean)
    if (c == ',' || c == '\n' || c == '\r') c = ' ';
  std::fprintf(f_, "FAULT,%ld,%s\n", step, clean.c_str());
  std::fflush(f_);
}

void LogWriter::close() {
  if (f_) {
    std::fclose(f_);
    f_ = nullptr;
  }
}

bool LogTable::has(const std::string& name) const {
  for (const auto& c : columns)
    if (c == name) return true;
  return false;
}

std::size_t LogTable::index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw ConfigError("log has no column '" + name + "'");
}

std::vector<double> LogTable::column(const std::string& name) const {
  const std::size_t k = index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

std::string LogTable::text_cell(std::size_t row, const std::string& name) const {
  const auto it = text.find(index(name));
  if (it == text.end() || row >= it->second.size()) return {};
  return it->second[row];
}

LogTable read_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open log " + path.string());
  LogTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
  }
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("FAULT", 0) == 0) {
      t.faulted = true;
      t.fault = line;
      break;
    }
    std::vector<double> r;
    r.reserve(t.columns.size());
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(p, comma, v);
      if (ec != std::errc() || ptr != comma) {
        auto& col = t.text[r.size()];
        col.resize(t.rows.size() + 1);
        col.back().assign(p, comma);
        v = std::numeric_limits<double>::quiet_NaN();
      }
      r.push_back(v);
      p = comma + 1;
    }
    if (r.size() != t.columns.size())
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.columns.size()) + " cells");
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace pnmpc::harness
