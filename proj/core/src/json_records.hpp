#pragma once

// JSON codecs shared by the line-delimited file formats.

#include <string>
#include <string_view>

#include <json.hpp>

#include "eot/types.hpp"

namespace eot::detail {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

std::string dump_line(const ojson& value);
json parse_json(std::string_view text, std::string_view what);

ojson review_to_json(const Review& review);
Review review_from_json(const json& value);

/// `[{"emotion": "Joy", "triggers": ["..."]}]`
ojson emotions_to_json(const EotOutput& output);

/// Strict reader for annotation-shaped objects. Triggers are plain strings
/// (located leftmost) or {"text", "start", "end"} objects. The result is
/// validated against `review`; any problem throws Error(kMalformedRecord).
EotOutput output_from_json(const json& value, const Review& review);

const json& require(const json& object, std::string_view key, std::string_view what);
std::string require_string(const json& object, std::string_view key,
                           std::string_view what);

}  // namespace eot::detail
