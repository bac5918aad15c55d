#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pnmpc::harness {

/// Column order of every scenario log.
const std::vector<std::string>& log_columns();

/// CSV writer: header, fixed columns, 9 significant digits.
class LogWriter {
 public:
  explicit LogWriter(const std::filesystem::path& path);
  ~LogWriter();
  LogWriter(const LogWriter&) = delete;
  LogWriter& operator=(const LogWriter&) = delete;

  /// `values` must follow log_columns().
  void row(const std::vector<double>& values);
  void fault(long step, const std::string& message);
  void close();

 private:
  std::FILE* f_ = nullptr;
  std::filesystem::path path_;
  std::string line_;
};

/// Numeric CSV table as produced by LogWriter (or any header + numbers file).
struct LogTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Non-numeric cells (stored as NaN in `rows`), by column then row.
  std::map<std::size_t, std::vector<std::string>> text;
  bool faulted = false;
  std::string fault;

  bool has(const std::string& name) const;
  /// Throws ConfigError if the column is missing.
  std::vector<double> column(const std::string& name) const;
  std::size_t index(const std::string& name) const;
  std::string text_cell(std::size_t row, const std::string& name) const;
};

/// Reads a log; stops at a FAULT row. Throws ConfigError on unreadable files.
LogTable read_log(const std::filesystem::path& path);

}  // namespace pnmpc::harness
