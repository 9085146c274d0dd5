#pragma once

// Internal bridge between public string-based JSON interfaces and the
// vendored nlohmann parser. Not installed.

#include <string>

#include "json.hpp"
#include "rmlab/b_factors.hpp"
#include "rmlab/distributions.hpp"
#include "rmlab/errors.hpp"

namespace rmlab::detail {

nlohmann::json parse_json(const std::string& text, const char* what);

EntryDistribution distribution_from_json_obj(const nlohmann::json& j);
nlohmann::json distribution_to_json_obj(const EntryDistribution& d);

BFactorSpec b_factor_from_json_obj(const nlohmann::json& j);
nlohmann::json b_factor_to_json_obj(const BFactorSpec& spec);

}  // namespace rmlab::detail
