#pragma once

#include <string>
#include <string_view>

namespace topicorr {

// Shortest decimal that round-trips, independent of locale.
std::string format_double(double v);
std::string format_float(float v);

// Throws ParseError on trailing garbage or an empty field.
double parse_double(std::string_view text);
float parse_float(std::string_view text);

}  // namespace topicorr
