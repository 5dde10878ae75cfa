#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace osc {

/// Shortest decimal text that parses back to the same double ("nan" for NaN).
[[nodiscard]] std::string format_real(double value);
/// Throws InvalidArgument unless the whole string is a number.
[[nodiscard]] double parse_real(std::string_view text);
[[nodiscard]] std::vector<std::string> split_csv(std::string_view line);

}  // namespace osc
