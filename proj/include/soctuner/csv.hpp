#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace soctuner::csv {

/// Split one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split(std::string_view line);

/// Quote a field only when it needs it.
std::string escape(std::string_view field);

void write_row(std::ostream& out, std::span<const std::string> fields);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

/// Strict full-field parse; returns false on trailing garbage or non-finite input.
bool parse_number(std::string_view text, double& value);

}  // namespace soctuner::csv
