#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace topicorr {

// A UTC calendar month.
struct YearMonth {
    int year = 1970;
    int month = 1;  // 1..12

    auto operator<=>(const YearMonth&) const = default;

    YearMonth next() const noexcept;
    std::string to_string() const;  // "YYYY-MM"

    // Parses "YYYY-MM"; throws ParseError otherwise.
    static YearMonth parse(std::string_view text);
    static YearMonth from_epoch(std::int64_t seconds) noexcept;

    // First and last second of the month, inclusive.
    std::int64_t first_second() const noexcept;
    std::int64_t last_second() const noexcept;
};

// Inclusive range [start, end]; empty when start > end.
std::vector<YearMonth> months_between(YearMonth start, YearMonth end);

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day) noexcept;

}  // namespace topicorr
