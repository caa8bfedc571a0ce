#pragma once

#include <string>
#include <string_view>

namespace atep {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Strict parse of a whole token; throws std::invalid_argument on junk.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace atep
