#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "prkg/date.hpp"

namespace prkg {

using TextList = std::vector<std::string>;

/// Property values: text, integer, finite decimal, boolean, partial date or a
/// list of non-empty text.
using PropertyValue = std::variant<std::string, std::int64_t, double, bool, PartialDate, TextList>;

using PropertyMap = std::map<std::string, PropertyValue>;

/// A property update; std::nullopt removes the key.
using PropertyUpdates = std::map<std::string, std::optional<PropertyValue>>;

/// Throws invalid_argument for NaN/infinite decimals or empty list elements.
void check_value(const std::string& key, const PropertyValue& value);
void check_properties(const PropertyMap& properties);

/// Human rendering: text as-is, dates in ISO form, lists comma-joined.
std::string render_text(const PropertyValue& value);

/// Shortest round-trip rendering of a decimal.
std::string render_decimal(double value);

/// Interprets a command-line value: `true`/`false`, integers, decimals,
/// `date:YYYY[-MM[-DD]]`, `[a,b,...]` lists, a double-quoted string, or plain
/// text otherwise.
PropertyValue parse_cli_value(const std::string& text);

const std::string* as_text(const PropertyValue& value);

}  // namespace prkg
