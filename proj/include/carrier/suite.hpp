#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "carrier/report.hpp"

namespace carrier {

// Plain-text configuration: one `key = value` per line, `#` starts a comment.
// Keys outside the documented set raise ConfigError.
class SuiteConfig {
 public:
  SuiteConfig();  // defaults, no modules selected

  static SuiteConfig parse(std::istream& is);
  static SuiteConfig load(const std::filesystem::path& path);
  // named scenarios: weights-gevrey, lemma2-d2, dbar-d1, pws-comb, cones-duality, mollifier, all
  static SuiteConfig preset(const std::string& name);
  static const std::vector<std::string>& preset_names();
  static const std::vector<std::string>& module_names();

  void set(const std::string& key, const std::string& value);  // ConfigError on unknown key or bad value
  const std::string& raw(const std::string& key) const;
  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;  // comma separated

  const std::string& scenario() const { return raw("scenario"); }
  std::vector<std::string> modules() const;
  std::uint64_t seed() const;
  double tolerance_scale() const { return number("tolerance_scale"); }
  std::filesystem::path out_dir() const { return raw("out_dir"); }

  void validate() const;  // ConfigError if no module is selected or a value is out of range
  void write(std::ostream& os) const;

 private:
  std::map<std::string, std::string> values_;
};

struct CheckResult {
  std::string module;
  EstimateReport report;
  double seconds = 0;
};

struct SuiteReport {
  std::string scenario;
  std::vector<CheckResult> checks;  // fixed order: module order, then check order
  bool pass = true;
  double seconds = 0;
  std::string environment;
  std::vector<std::filesystem::path> records;
};

// Line-delimited numeric records with a `#` header naming the columns.
class RecordFile {
 public:
  RecordFile(const std::filesystem::path& path, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream os_;
  std::size_t width_;
};

SuiteReport run_suite(const SuiteConfig& config);

// body is deterministic for a fixed config; timing lines are prefixed `# time`
void write_suite_report(std::ostream& os, const SuiteReport& r);
int exit_code(const SuiteReport& r);  // 0 all pass, 1 otherwise

}  // namespace carrier
