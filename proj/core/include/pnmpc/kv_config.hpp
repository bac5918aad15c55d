#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace pnmpc {

/// Flat `key = value` text with '#' comments. Later lookups are tracked so
/// that unused (misspelled) keys can be reported.
class KvConfig {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  /// Throws ValidationError listing every malformed or duplicate line.
  static KvConfig parse(std::istream& in, const std::string& source = "<input>");
  static KvConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, Entry>& entries() const { return entries_; }
  const std::string& source() const { return source_; }

  /// Directory of the file the config was loaded from (for relative paths).
  const std::filesystem::path& base_dir() const { return base_dir_; }
  std::filesystem::path resolve(const std::string& relative) const;

  /// Inserts or replaces a value (line 0 marks an override).
  void set(const std::string& key, std::string value) { entries_[key] = Entry{std::move(value), 0}; }

 private:
  std::map<std::string, Entry> entries_;
  std::string source_;
  std::filesystem::path base_dir_;
};

/// Typed accessors that accumulate problems instead of throwing one at a time.
class KvReader {
 public:
  explicit KvReader(const KvConfig& cfg) : cfg_(cfg) {}

  double number(const std::string& key, double fallback, double lo = -1e300, double hi = 1e300);
  double required_number(const std::string& key, double lo = -1e300, double hi = 1e300);
  int integer(const std::string& key, int fallback, int lo = -1000000000, int hi = 1000000000);
  std::string text(const std::string& key, const std::string& fallback);
  std::string required_text(const std::string& key);
  std::string choice(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& allowed);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  bool flag(const std::string& key, bool fallback);

  void problem(std::string msg) { problems_.push_back(std::move(msg)); }
  void mark_used(const std::string& key) { used_.insert(key); }

  /// Flags keys that were never read, then throws ValidationError if any
  /// problem was recorded.
  void finish();

  const std::vector<std::string>& problems() const { return problems_; }
  const KvConfig& config() const { return cfg_; }

 private:
  const KvConfig::Entry* find(const std::string& key);
  std::string where(const std::string& key) const;

  const KvConfig& cfg_;
  std::set<std::string> used_;
  std::vector<std::string> problems_;
};

}  // namespace pnmpc
