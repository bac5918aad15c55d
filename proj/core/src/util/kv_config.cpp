#include "pnmpc/kv_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pnmpc/errors.hpp"

namespace pnmpc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

KvConfig KvConfig::parse(std::istream& in, const std::string& source) {
  KvConfig cfg;
  cfg.source_ = source;
  std::vector<std::string> problems;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      problems.push_back(source + ":" + std::to_string(lineno) + ": empty key");
      continue;
    }
    if (auto it = cfg.entries_.find(key); it != cfg.entries_.end()) {
      problems.push_back(source + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                         "' (first on line " + std::to_string(it->second.line) + ")");
      continue;
    }
    cfg.entries_.emplace(key, Entry{value, lineno});
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({path.string() + ": cannot open file"});
  KvConfig cfg = parse(in, path.string());
  cfg.base_dir_ = path.parent_path();
  return cfg;
}

std::filesystem::path KvConfig::resolve(const std::string& relative) const {
  std::filesystem::path p(relative);
  if (p.is_absolute() || base_dir_.empty()) return p;
  return base_dir_ / p;
}

const KvConfig::Entry* KvReader::find(const std::string& key) {
  used_.insert(key);
  auto it = cfg_.entries().find(key);
  return it == cfg_.entries().end() ? nullptr : &it->second;
}

std::string KvReader::where(const std::string& key) const {
  auto it = cfg_.entries().find(key);
  if (it == cfg_.entries().end()) return cfg_.source() + ": '" + key + "'";
  return cfg_.source() + ":" + std::to_string(it->second.line) + ": '" + key + "'";
}

double KvReader::number(const std::string& key, double fallback, double lo, double hi) {
  const auto* e = find(key);
  if (!e) return fallback;
  double v = 0.0;
  if (!parse_double(e->value, v)) {
    problem(where(key) + " is not a number: '" + e->value + "'");
    return fallback;
  }
  if (v < lo || v > hi) {
    std::ostringstream os;
    os << where(key) << " = " << v << " outside [" << lo << ", " << hi << "]";
    problem(os.str());
    return fallback;
  }
  return v;
}

double KvReader::required_number(const std::string& key, double lo, double hi) {
  if (!cfg_.has(key)) {
    used_.insert(key);
    problem(where(key) + " is required");
    return std::max(lo, std::min(hi, 0.0));
  }
  return number(key, std::max(lo, std::min(hi, 0.0)), lo, hi);
}

int KvReader::integer(const std::string& key, int fallback, int lo, int hi) {
  const auto* e = find(key);
  if (!e) return fallback;
  int v = 0;
  auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
  if (ec != std::errc() || ptr != e->value.data() + e->value.size()) {
    problem(where(key) + " is not an integer: '" + e->value + "'");
    return fallback;
  }
  if (v < lo || v > hi) {
    problem(where(key) + " = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
            std::to_string(hi) + "]");
    return fallback;
  }
  return v;
}

std::string KvReader::text(const std::string& key, const std::string& fallback) {
  const auto* e = find(key);
  return e ? e->value : fallback;
}

std::string KvReader::required_text(const std::string& key) {
  const auto* e = find(key);
  if (!e || e->value.empty()) {
    problem(where(key) + " is required");
    return {};
  }
  return e->value;
}

std::string KvReader::choice(const std::string& key, const std::string& fallback,
                             const std::vector<std::string>& allowed) {
  const auto* e = find(key);
  if (!e) return fallback;
  for (const auto& a : allowed)
    if (a == e->value) return a;
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
  problem(where(key) + " must be one of {" + list + "}, got '" + e->value + "'");
  return fallback;
}

std::vector<double> KvReader::numbers(const std::string& key, const std::vector<double>& fallback) {
  const auto* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  std::string item;
  std::istringstream in(e->value);
  while (std::getline(in, item, ',')) {
    double v = 0.0;
    if (!parse_double(trim(item), v)) {
      problem(where(key) + " has a non-numeric entry '" + trim(item) + "'");
      return fallback;
    }
    out.push_back(v);
  }
  if (out.empty()) {
    problem(where(key) + " is empty");
    return fallback;
  }
  return out;
}

bool KvReader::flag(const std::string& key, bool fallback) {
  const auto* e = find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  problem(where(key) + " must be true/false, got '" + e->value + "'");
  return fallback;
}

void KvReader::finish() {
  for (const auto& [key, entry] : cfg_.entries())
    if (!used_.count(key))
      problems_.push_back(cfg_.source() + ":" + std::to_string(entry.line) + ": unknown key '" +
                          key + "'");
  if (!problems_.empty()) throw ValidationError(problems_);
}

}  // namespace pnmpc
