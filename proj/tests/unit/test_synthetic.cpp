#include <doctest.h>

#include <set>
#include <sstream>

#include "topicorr/error.hpp"
#include "topicorr/synthetic.hpp"

using namespace topicorr;

namespace {

std::set<std::string> token_set(const Corpus& c) {
    std::set<std::string> out;
    for (const auto& p : c) {
        std::istringstream in(p.body);
        std::string t;
        while (in >> t) out.insert(t);
    }
    return out;
}

std::string dump(const Corpus& c) {
    std::ostringstream out;
    write_postings(c, out);
    return out.str();
}

SyntheticSpec small() {
    SyntheticSpec s;
    s.num_topics = 3;
    s.vocab_size = 20;
    s.docs_per_month = 60;
    s.months = {{2020, 1}, {2020, 2}};
    return s;
}

}  // namespace

TEST_CASE("same spec and seed give byte-identical corpora") {
    const auto a = generate_synthetic(small(), 5);
    const auto b = generate_synthetic(small(), 5);
    CHECK(dump(a.a) == dump(b.a));
    CHECK(dump(a.b) == dump(b.b));
    CHECK(dump(generate_synthetic(small(), 6).a) != dump(a.a));
}

TEST_CASE("overlap 0 gives disjoint vocabularies, overlap 1 identical ones") {
    auto spec = small();
    spec.docs_per_month = 300;
    spec.overlap = 0.0;
    auto p0 = generate_synthetic(spec, 1);
    const auto a0 = token_set(p0.a), b0 = token_set(p0.b);
    for (const auto& t : a0) CHECK_FALSE(b0.contains(t));

    spec.overlap = 1.0;
    auto p1 = generate_synthetic(spec, 1);
    CHECK(token_set(p1.a) == token_set(p1.b));
}

TEST_CASE("shared ranks follow the overlap fraction") {
    for (double rho : {0.0, 0.25, 0.5, 0.7, 1.0}) {
        int shared = 0;
        for (int i = 0; i < 20; ++i) shared += synthetic_rank_shared(i, rho);
        CHECK(shared == static_cast<int>(20 * rho + 1e-9));
    }
    CHECK(synthetic_token(false, 0, 0, 0.0) == "rtawa");
    CHECK(synthetic_token(true, 0, 0, 0.0) == "mtawa");
    CHECK(synthetic_token(true, 2, 27, 1.0) == "rtcwbb");
}

TEST_CASE("reference stream does not depend on the overlap") {
    auto spec = small();
    spec.overlap = 0.0;
    const auto b0 = dump(generate_synthetic(spec, 3).b);
    spec.overlap = 0.8;
    CHECK(dump(generate_synthetic(spec, 3).b) == b0);
    spec.overlap_schedule = {0.1, 0.9};
    CHECK(dump(generate_synthetic(spec, 3).b) == b0);
}

TEST_CASE("documents fall inside their month and carry the requested length") {
    auto spec = small();
    const auto pair = generate_synthetic(spec, 8);
    CHECK(pair.a.size() == 120);
    for (const auto& p : pair.a) {
        const auto ym = YearMonth::from_epoch(p.created_utc);
        CHECK((ym == YearMonth{2020, 1} || ym == YearMonth{2020, 2}));
        std::istringstream in(p.body);
        std::string t;
        int n = 0;
        while (in >> t) ++n;
        CHECK(n == spec.doc_length);
    }
}

TEST_CASE("planted keywords reach exactly round(rate * docs) documents per month and stream") {
    auto spec = small();
    spec.planted_keywords = {{"lockdown", 0.25}, {"depression", 0.5}};
    const auto pair = generate_synthetic(spec, 4);
    for (const Corpus* c : {&pair.a, &pair.b})
        for (const auto& [term, want] : {std::pair{"lockdown", 15}, std::pair{"depression", 30}}) {
            std::map<YearMonth, int> per_month;
            for (const auto& p : *c) {
                std::istringstream in(p.body);
                std::string t;
                bool hit = false;
                while (in >> t) hit = hit || t == term;
                per_month[YearMonth::from_epoch(p.created_utc)] += hit;
            }
            for (const auto& [m, n] : per_month) CHECK(n == want);
        }
}

TEST_CASE("planted topic distributions are Zipfian by rank") {
    auto spec = small();
    const auto topic = synthetic_topic(spec, 1);
    REQUIRE(topic.size() == 20);
    double total = 0;
    for (const auto& [tok, p] : topic) total += p;
    CHECK(total == doctest::Approx(1.0));
    CHECK(topic[0].second / topic[1].second == doctest::Approx(2.0));
    CHECK(topic[0].first == "rtbwa");
}

TEST_CASE("invalid specs are rejected") {
    auto spec = small();
    spec.overlap = 1.5;
    CHECK_THROWS_AS(generate_synthetic(spec, 1), Error);
    spec = small();
    spec.overlap_schedule = {0.5};
    CHECK_THROWS_AS(generate_synthetic(spec, 1), Error);
    spec = small();
    spec.months.clear();
    CHECK_THROWS_AS(generate_synthetic(spec, 1), Error);
    spec = small();
    spec.mixture_schedule = {{0.1, 0.1}};
    CHECK_THROWS_AS(generate_synthetic(spec, 1), Error);
}

TEST_CASE("bundle: one reference corpus shared by every stream") {
    const auto doc = nlohmann::json::parse(R"({
        "seed": 3, "range": {"start": "2020-01", "end": "2020-03"},
        "num_topics": 2, "vocab_size": 10, "docs_per_month": 20, "doc_length": 15,
        "planted_keywords": [{"term": "lockdown", "rate": 0.5}],
        "reference": "Coronavirus",
        "streams": [{"name": "depression", "schedule": {"2020-02": 1.0}},
                    {"name": "Anxiety", "overlap": 0.5}]
    })");
    const auto bundle = parse_synthetic_bundle(doc);
    REQUIRE(bundle.streams.size() == 2);
    CHECK(bundle.streams[0].overlap_schedule == std::vector<double>{0.0, 1.0, 0.0});
    CHECK(bundle.streams[1].overlap_schedule == std::vector<double>{0.5, 0.5, 0.5});
    const auto corpora = generate_bundle(bundle);
    CHECK(corpora.size() == 3);

    auto single = bundle.base;
    single.subreddit_a = "depression";
    single.subreddit_b = "Coronavirus";
    single.overlap_schedule = bundle.streams[0].overlap_schedule;
    CHECK(dump(generate_synthetic(single, 3).b) == dump(corpora.at("Coronavirus")));
}

TEST_CASE("bundle spec errors name the key") {
    auto key_of = [](const char* text) {
        try {
            parse_synthetic_bundle(nlohmann::json::parse(text));
        } catch (const ConfigError& e) {
            return e.key();
        }
        return std::string("none");
    };
    CHECK(key_of(R"({"range": {"start": "2020-01", "end": "2020-02"}, "streams": [{"name": "a"}]})") == "reference");
    CHECK(key_of(R"({"reference": "r", "streams": [{"name": "a"}]})") == "range");
    CHECK(key_of(R"({"range": {"start": "2020-01", "end": "2020-02"}, "reference": "r", "streams": [{"name": "a", "schedule": {"2021-01": 1}}]})") ==
          "streams[0].schedule");
    CHECK(key_of(R"({"range": {"start": "2020-01", "end": "2020-02"}, "reference": "r", "streams": [{"name": "a"}], "bogus": 1})") ==
          "bogus");
}
