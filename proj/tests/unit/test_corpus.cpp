#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "topicorr/corpus.hpp"
#include "topicorr/error.hpp"
#include "topicorr/rng.hpp"

using namespace topicorr;

namespace {

Corpus parse(const std::string& text, LoadReport* report = nullptr) {
    std::istringstream in(text);
    return load_postings(in, report);
}

}  // namespace

TEST_CASE("bundled sample: 12 postings over 10 months") {
    // Counts checked with a one-off Python script over the same file.
    const Corpus c = load_postings(std::string(TOPICORR_SOURCE_DIR) + "/data/sample/postings_sample.jsonl");
    CHECK(c.size() == 12);
    const auto b = bucket_by_month(c, {2020, 1}, {2020, 12});
    std::size_t nonempty = 0;
    for (const auto& m : b.buckets) nonempty += !m.postings.empty();
    CHECK(nonempty == 10);
    CHECK(b.buckets.size() == 12);
    CHECK(b.dropped_before + b.dropped_after == 0);
}

TEST_CASE("load_postings reads fields and keeps file order") {
    const Corpus c = parse(
        R"({"id":"b","subreddit":"x","created_utc":200,"title":"T","selftext":"body"})"
        "\n\n"
        R"({"id":"a","subreddit":"x","created_utc":100.0})"
        "\n"
        R"({"id":"c","subreddit":"x","created_utc":150,"title":"only title"})"
        "\n");
    REQUIRE(c.size() == 2);
    CHECK(c[0].id == "b");
    CHECK(c[0].text() == "T body");
    CHECK(c[1].id == "c");
}

TEST_CASE("records with empty title and body are skipped and counted") {
    LoadReport rep;
    const Corpus c = parse(R"({"id":"a","subreddit":"x","created_utc":1,"title":"","selftext":""})"
                           "\n"
                           R"({"id":"b","subreddit":"x","created_utc":1,"title":"t"})",
                           &rep);
    CHECK(c.size() == 1);
    CHECK(rep.loaded == 1);
    CHECK(rep.skipped_blank == 1);
}

TEST_CASE("malformed input names the line") {
    auto line_of = [](const std::string& text) {
        try {
            parse(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return std::size_t{0};
    };
    const std::string ok = R"({"id":"a","subreddit":"x","created_utc":5,"title":"t"})";
    CHECK(line_of(ok + "\n{not json\n") == 2);
    CHECK(line_of(ok + "\n" + ok + "\n") == 2);  // duplicate id
    CHECK(line_of(R"({"subreddit":"x","created_utc":5})") == 1);
    CHECK(line_of(R"({"id":"q","subreddit":"x"})") == 1);
    CHECK(line_of(R"({"id":"q","created_utc":4})") == 1);
    CHECK(line_of(R"({"id":"q","subreddit":"x","created_utc":-3,"title":"t"})") == 1);
    CHECK(line_of(R"([1,2])") == 1);
}

TEST_CASE("Corpus rejects duplicate and empty ids") {
    CHECK_THROWS_AS(Corpus({{"a", "s", 1, "t", ""}, {"a", "s", 2, "t", ""}}), Error);
    CHECK_THROWS_AS(Corpus({{"", "s", 1, "t", ""}}), Error);
}

TEST_CASE("write then load is the identity") {
    Rng rng(3);
    std::vector<Posting> ps;
    for (int i = 0; i < 50; ++i) {
        std::string title = "title " + std::to_string(i) + " \"quoted\" \\ tab\t";
        std::string body = i % 3 ? "caf\xc3\xa9 line\nbreak" : "";
        ps.push_back({"id" + std::to_string(i), i % 2 ? "Anxiety" : "Coronavirus",
                      static_cast<std::int64_t>(1 + rng.below(2'000'000'000)), title, body});
    }
    const Corpus c(ps);
    std::ostringstream out;
    write_postings(c, out);
    CHECK(parse(out.str()) == c);
}

TEST_CASE("buckets are disjoint and cover the in-range subset") {
    Rng rng(11);
    std::vector<Posting> ps;
    const auto lo = YearMonth{2019, 11}.first_second();
    const auto hi = YearMonth{2021, 2}.last_second();
    for (int i = 0; i < 400; ++i)
        ps.push_back({"p" + std::to_string(i), "s", lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))),
                      "t", ""});
    const Corpus c(ps);
    const YearMonth start{2020, 1}, end{2020, 10};
    const auto r = bucket_by_month(c, start, end);
    REQUIRE(r.buckets.size() == 10);

    std::set<std::string> seen;
    std::size_t in_range = 0, before = 0, after = 0;
    for (const auto& p : c) {
        if (p.created_utc < start.first_second()) ++before;
        else if (p.created_utc > end.last_second()) ++after;
        else ++in_range;
    }
    std::size_t total = 0;
    for (const auto& b : r.buckets) {
        for (const auto& p : b.postings) {
            CHECK(seen.insert(p.id).second);
            CHECK(p.created_utc >= b.month.first_second());
            CHECK(p.created_utc <= b.month.last_second());
        }
        total += b.postings.size();
    }
    CHECK(total == in_range);
    CHECK(r.dropped_before == before);
    CHECK(r.dropped_after == after);
}

TEST_CASE("boundary seconds land in the right month") {
    const auto mar = YearMonth{2020, 3};
    const Corpus c({{"a", "s", mar.first_second() - 1, "t", ""},
                    {"b", "s", mar.first_second(), "t", ""},
                    {"c", "s", mar.last_second(), "t", ""}});
    const auto r = bucket_by_month(c, {2020, 2}, {2020, 3});
    CHECK(r.buckets[0].postings.size() == 1);
    CHECK(r.buckets[1].postings.size() == 2);
}
