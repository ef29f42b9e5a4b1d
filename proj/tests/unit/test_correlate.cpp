#include <doctest.h>

#include <cmath>
#include <sstream>

#include "topicorr/correlate.hpp"
#include "topicorr/error.hpp"
#include "topicorr/rng.hpp"

using namespace topicorr;

namespace {

VectorSet random_set(std::size_t n, std::size_t dim, Rng& rng) {
    VectorSet out(n, std::vector<double>(dim));
    for (auto& v : out)
        for (auto& x : v) x = rng.normal();
    return out;
}

// Plain reference: cosine written out per pair, averaged over the grid.
double naive_mean(const VectorSet& a, const VectorSet& b) {
    double total = 0.0;
    for (const auto& u : a)
        for (const auto& v : b) {
            double dot = 0, nu = 0, nv = 0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                dot += u[i] * v[i];
                nu += u[i] * u[i];
                nv += v[i] * v[i];
            }
            total += dot / std::sqrt(nu * nv);
        }
    return total / static_cast<double>(a.size() * b.size());
}

CorrelationSeries series_of(const std::vector<std::optional<double>>& scores) {
    CorrelationSeries s{{"a", "b"}, PairMethod::mean, {}};
    YearMonth m{2020, 1};
    for (auto v : scores) {
        CorrelationPoint p;
        p.month = m;
        p.score = v;
        if (!v) p.reason = "no topics for a";
        s.points.push_back(p);
        m = m.next();
    }
    return s;
}

}  // namespace

TEST_CASE("cosine") {
    std::vector<double> e1{1, 0}, e2{0, 1}, u{1, 2}, v{2, 4}, w{1, 1}, zero{0, 0};
    CHECK(cosine(e1, e2).value == 0.0);
    CHECK(cosine(u, v).value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine(w, e1).value == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    auto degenerate = cosine(zero, e1);
    CHECK(degenerate.degenerate);
    CHECK(degenerate.value == 0.0);
    std::vector<double> three{1, 2, 3};
    CHECK_THROWS_AS(cosine(three, e1), Error);
}

TEST_CASE("pair correlation examples") {
    VectorSet single{{0.3, -1.2, 4.0}};
    CHECK(pair_correlation(single, single, PairMethod::mean) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pair_correlation(single, single, PairMethod::max_match) == doctest::Approx(1.0).epsilon(1e-15));

    VectorSet basis{{1, 0}, {0, 1}};
    CHECK(pair_correlation(basis, basis, PairMethod::mean) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pair_correlation(basis, basis, PairMethod::max_match) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(pair_correlation({}, basis, PairMethod::mean), Error);
    CHECK(parse_pair_method("max-match") == PairMethod::max_match);
    CHECK(std::string(to_string(PairMethod::mean)) == "mean");
    CHECK_THROWS_AS(parse_pair_method("median"), Error);
}

TEST_CASE("pair correlation properties") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        auto a = random_set(1 + rng.below(6), 12, rng);
        auto b = random_set(1 + rng.below(6), 12, rng);
        for (auto method : {PairMethod::mean, PairMethod::max_match}) {
            const double s = pair_correlation(a, b, method);
            CHECK(s >= -1.0);
            CHECK(s <= 1.0);
            CHECK(s == doctest::Approx(pair_correlation(b, a, method)).epsilon(1e-12));
        }
        CHECK(pair_correlation(a, b, PairMethod::mean) == doctest::Approx(naive_mean(a, b)).epsilon(1e-12));
        CHECK(pair_correlation(a, b, PairMethod::max_match) >= pair_correlation(a, b, PairMethod::mean) - 1e-12);
        // Scaling any vector by a positive factor changes nothing.
        auto scaled = a;
        for (auto& x : scaled[0]) x *= 3.5;
        CHECK(pair_correlation(scaled, b, PairMethod::mean) ==
              doctest::Approx(pair_correlation(a, b, PairMethod::mean)).epsilon(1e-12));
    }
}

TEST_CASE("argmax") {
    CHECK(series_of({0.2, 0.5, 0.3}).argmax() == YearMonth{2020, 2});
    CHECK(series_of({0.4, 0.4, 0.1}).argmax() == YearMonth{2020, 1});
    CHECK(series_of({std::nullopt, 0.1, std::nullopt}).argmax() == YearMonth{2020, 2});
    CHECK_FALSE(series_of({std::nullopt, std::nullopt}).argmax().has_value());

    // Strictly increasing transforms keep the argmax.
    auto s = series_of({0.1, -0.3, 0.7, 0.2});
    auto t = s;
    for (auto& p : t.points) p.score = std::exp(3.0 * *p.score) + 2.0;
    CHECK(s.argmax() == t.argmax());
}

TEST_CASE("build_series records absent months") {
    std::map<YearMonth, MonthTopics> monthly;
    monthly[{2020, 1}] = {{{1, 0}}, {{1, 0}}, "raw"};
    monthly[{2020, 2}] = {{}, {{1, 0}}, "raw"};
    monthly[{2020, 4}] = {{{1, 0}}, {{0, 1}}, "reduced"};
    auto s = build_series({"x", "y"}, monthly, {2020, 1}, {2020, 4}, PairMethod::mean);
    REQUIRE(s.points.size() == 4);
    CHECK(*s.points[0].score == doctest::Approx(1.0));
    CHECK_FALSE(s.points[1].score);
    CHECK(s.points[1].reason == "no topics for x");
    CHECK_FALSE(s.points[2].score);
    CHECK_FALSE(s.points[2].reason.empty());
    CHECK(s.points[3].space == "reduced");
    CHECK(*s.points[3].score == doctest::Approx(0.0));
    CHECK(s.argmax() == YearMonth{2020, 1});
}

TEST_CASE("series CSV round trip") {
    auto a = series_of({0.25, std::nullopt, -0.125});
    auto b = series_of({0.1, 0.2, 0.3});
    b.pair = {"depression", "Coronavirus"};
    b.method = PairMethod::max_match;
    for (auto& p : b.points) {
        p.method = PairMethod::max_match;
        p.space = "reduced";
        p.n_topics_a = 3;
        p.n_topics_b = 4;
    }
    a.points[1].reason = "no topics, \"quoted\"";
    std::ostringstream out;
    write_series_csv({a, b}, out, {"config_hash=abc", "seed=7"});
    const std::string text = out.str();
    CHECK(text.rfind("# config_hash=abc\n# seed=7\nmonth,pair,method,space,score,n_topics_a,n_topics_b,reason\n", 0) == 0);

    std::istringstream in(text);
    auto back = read_series_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].pair.label() == "a/b");
    CHECK(back[1].method == PairMethod::max_match);
    REQUIRE(back[0].points.size() == 3);
    CHECK(*back[0].points[0].score == 0.25);
    CHECK_FALSE(back[0].points[1].score);
    CHECK(back[0].points[1].reason == "no topics, \"quoted\"");
    CHECK(back[1].points[2].n_topics_b == 4);
    CHECK(back[1].points[2].space == "reduced");

    std::ostringstream again;
    write_series_csv(back, again, {"config_hash=abc", "seed=7"});
    CHECK(again.str() == text);

    std::istringstream bad("month,pair\n");
    CHECK_THROWS_AS(read_series_csv(bad), ParseError);
}
