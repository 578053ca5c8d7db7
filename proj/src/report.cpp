#include "carrier/report.hpp"

#include <cstdio>

#include "carrier/error.hpp"

namespace carrier {

double EstimateReport::at(const std::string& key) const {
  if (auto v = get(key)) return *v;
  throw Error(ErrorKind::InvalidArgument, "report " + name + " has no constant " + key);
}

const EstimateReport* EstimateReport::find(const std::string& childName) const {
  for (const auto& c : children) {
    if (c.name == childName) return &c;
    if (auto* p = c.find(childName)) return p;
  }
  return nullptr;
}

static std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_report(std::ostream& os, const EstimateReport& r, int indent) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  os << pad << (r.pass ? "PASS " : "FAIL ") << r.name;
  if (r.samples > 0) os << "  samples=" << r.samples << " min_margin=" << num(r.minMargin);
  os << '\n';
  for (const auto& [k, v] : r.constants) os << pad << "  " << k << " = " << num(v) << '\n';
  for (const auto& n : r.notes) os << pad << "  note: " << n << '\n';
  for (const auto& c : r.children) write_report(os, c, indent + 1);
}

}  // namespace carrier
