#include "topicorr/format.hpp"

#include <charconv>

#include "topicorr/error.hpp"

namespace topicorr {

namespace {

template <typename T>
std::string to_shortest(T v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <typename T>
T from_text(std::string_view text) {
    T v{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc{} || ptr != last)
        throw ParseError("not a number: '" + std::string(text) + "'");
    return v;
}

}  // namespace

std::string format_double(double v) { return to_shortest(v); }
std::string format_float(float v) { return to_shortest(v); }
double parse_double(std::string_view text) { return from_text<double>(text); }
float parse_float(std::string_view text) { return from_text<float>(text); }

}  // namespace topicorr
