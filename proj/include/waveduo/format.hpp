#pragma once

#include <string>
#include <string_view>

namespace waveduo {

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

/// Strict full-string parse; throws ValidationError naming `what` on failure.
double parse_number(std::string_view text, std::string_view what);
long parse_integer(std::string_view text, std::string_view what);

}  // namespace waveduo
