#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "mclt/cli.hpp"

namespace mclt::cli {

double round_sig12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::string format_sig12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

namespace report {

json num(double x) { return round_sig12(x); }

json nums(std::span<const double> xs) {
  json a = json::array();
  for (double x : xs) a.push_back(round_sig12(x));
  return a;
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string field(double x) { return format_sig12(x); }
std::string field(bool b) { return b ? "true" : "false"; }

std::string field(const json& v) {
  if (v.is_null()) return "n/a";
  if (v.is_boolean()) return field(v.get<bool>());
  if (v.is_number()) return format_sig12(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace report

}  // namespace mclt::cli
