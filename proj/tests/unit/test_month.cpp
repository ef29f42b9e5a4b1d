#include <doctest.h>

#include "topicorr/error.hpp"
#include "topicorr/month.hpp"

using namespace topicorr;

TEST_CASE("parse and format round-trip") {
    CHECK(YearMonth::parse("2020-09").to_string() == "2020-09");
    CHECK(YearMonth::parse("1999-12") == YearMonth{1999, 12});
    CHECK_THROWS_AS(YearMonth::parse("2020-13"), ParseError);
    CHECK_THROWS_AS(YearMonth::parse("2020-1"), ParseError);
    CHECK_THROWS_AS(YearMonth::parse("20-01x"), ParseError);
}

TEST_CASE("month boundaries in UTC") {
    // Epoch values from Python calendar.timegm.
    CHECK(YearMonth{2020, 3}.first_second() == 1583020800);
    CHECK(YearMonth{2020, 2}.last_second() == 1583020799);
    CHECK(YearMonth{2021, 1}.first_second() == 1609459200);
    CHECK(YearMonth::from_epoch(1583020799) == YearMonth{2020, 2});
    CHECK(YearMonth::from_epoch(1583020800) == YearMonth{2020, 3});
    CHECK(YearMonth::from_epoch(0) == YearMonth{1970, 1});
}

TEST_CASE("leap February is 29 days") {
    const auto feb = YearMonth{2020, 2};
    CHECK(feb.last_second() - feb.first_second() + 1 == 29 * 86400);
    const auto feb21 = YearMonth{2021, 2};
    CHECK(feb21.last_second() - feb21.first_second() + 1 == 28 * 86400);
}

TEST_CASE("months_between is inclusive and crosses years") {
    const auto ms = months_between({2019, 11}, {2020, 2});
    REQUIRE(ms.size() == 4);
    CHECK(ms.front() == YearMonth{2019, 11});
    CHECK(ms[2] == YearMonth{2020, 1});
    CHECK(ms.back() == YearMonth{2020, 2});
    CHECK(months_between({2020, 5}, {2020, 4}).empty());
}
