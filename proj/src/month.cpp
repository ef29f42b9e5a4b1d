#include "topicorr/month.hpp"

#include <charconv>
#include <cstdio>

#include "topicorr/error.hpp"

namespace topicorr {

// Howard Hinnant's days_from_civil / civil_from_days.
std::int64_t days_from_civil(int year, unsigned month, unsigned day) noexcept {
    const std::int64_t y = static_cast<std::int64_t>(year) - (month <= 2);
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (month > 2 ? month - 3 : month + 9) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

YearMonth YearMonth::from_epoch(std::int64_t seconds) noexcept {
    std::int64_t z = seconds >= 0 ? seconds / 86400 : (seconds - 86399) / 86400;
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m)};
}

YearMonth YearMonth::next() const noexcept {
    return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1};
}

std::string YearMonth::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

YearMonth YearMonth::parse(std::string_view text) {
    YearMonth ym;
    const auto dash = text.find('-');
    if (text.size() != 7 || dash != 4)
        throw ParseError("expected YYYY-MM, got '" + std::string(text) + "'");
    const char* first = text.data();
    const char* mid = text.data() + dash;
    const char* last = text.data() + text.size();
    auto r1 = std::from_chars(first, mid, ym.year);
    auto r2 = std::from_chars(mid + 1, last, ym.month);
    if (r1.ec != std::errc{} || r1.ptr != mid || r2.ec != std::errc{} || r2.ptr != last ||
        ym.month < 1 || ym.month > 12)
        throw ParseError("expected YYYY-MM, got '" + std::string(text) + "'");
    return ym;
}

std::int64_t YearMonth::first_second() const noexcept {
    return days_from_civil(year, static_cast<unsigned>(month), 1) * 86400;
}

std::int64_t YearMonth::last_second() const noexcept { return next().first_second() - 1; }

std::vector<YearMonth> months_between(YearMonth start, YearMonth end) {
    std::vector<YearMonth> out;
    for (YearMonth m = start; m <= end; m = m.next()) out.push_back(m);
    return out;
}

}  // namespace topicorr
