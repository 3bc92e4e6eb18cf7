#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace mclt::cli::report {

using nlohmann::json;

/// Number rounded to 12 significant digits.
json num(double x);
json nums(std::span<const double> xs);

/// Comma-separated rows under a header line. Fields are written verbatim.
std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

std::string field(double x);
std::string field(bool b);
std::string field(const json& maybe_number);

}  // namespace mclt::cli::report
