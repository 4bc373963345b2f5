#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace collabjudge::text {

std::vector<std::string_view> split_whitespace(std::string_view line);
std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

std::optional<long long> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

// Shortest representation that round-trips; "NA" for NaN.
std::string format_double(double value);

// round(x) with halves going up, tolerant to representation error just below .5
std::int64_t round_half_up(double x);

}  // namespace collabjudge::text
