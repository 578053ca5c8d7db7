#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace carrier {

// Outcome of checking one inequality over a sample set.
struct EstimateReport {
  std::string name;
  bool pass = true;
  // smallest (rhs - lhs) seen; +inf when nothing was sampled
  double minMargin = std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  std::vector<std::pair<std::string, double>> constants;
  std::vector<std::string> notes;
  std::vector<EstimateReport> children;

  void observe(double margin) {
    ++samples;
    if (margin < minMargin || std::isnan(margin)) minMargin = margin;
  }
  void set(const std::string& key, double value) {
    for (auto& [k, v] : constants)
      if (k == key) {
        v = value;
        return;
      }
    constants.emplace_back(key, value);
  }
  std::optional<double> get(const std::string& key) const {
    for (const auto& [k, v] : constants)
      if (k == key) return v;
    return std::nullopt;
  }
  double at(const std::string& key) const;
  void note(std::string s) { notes.push_back(std::move(s)); }
  void add(EstimateReport child) {
    pass = pass && child.pass;
    children.push_back(std::move(child));
  }
  const EstimateReport* find(const std::string& childName) const;
};

void write_report(std::ostream& os, const EstimateReport& r, int indent = 0);

}  // namespace carrier
