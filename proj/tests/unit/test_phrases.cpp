#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "topicorr/error.hpp"
#include "topicorr/phrases.hpp"
#include "topicorr/rng.hpp"

using namespace topicorr;

namespace {

std::vector<TokenDoc> docs_of(const std::vector<std::vector<std::string>>& tokens) {
    std::vector<TokenDoc> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) out.push_back({"d" + std::to_string(i), tokens[i]});
    return out;
}

// Brute-force reference: counts every quantity by rescanning the corpus.
std::map<std::pair<std::string, std::string>, double> brute_force_scores(const std::vector<TokenDoc>& docs,
                                                                          double delta, double threshold) {
    std::vector<std::string> all;
    for (const auto& d : docs) all.insert(all.end(), d.tokens.begin(), d.tokens.end());
    std::set<std::string> distinct(all.begin(), all.end());
    auto unigram = [&](const std::string& w) { return static_cast<std::size_t>(std::count(all.begin(), all.end(), w)); };
    std::set<std::pair<std::string, std::string>> candidates;
    for (const auto& d : docs)
        for (std::size_t i = 0; i + 1 < d.tokens.size(); ++i) candidates.insert({d.tokens[i], d.tokens[i + 1]});
    std::map<std::pair<std::string, std::string>, double> out;
    for (const auto& [a, b] : candidates) {
        std::size_t n = 0;
        for (const auto& d : docs)
            for (std::size_t i = 0; i + 1 < d.tokens.size(); ++i) n += d.tokens[i] == a && d.tokens[i + 1] == b;
        const double score = (static_cast<double>(n) - delta) * static_cast<double>(distinct.size()) /
                             (static_cast<double>(unigram(a)) * static_cast<double>(unigram(b)));
        if (score >= threshold) out[{a, b}] = score;
    }
    return out;
}

std::vector<TokenDoc> random_corpus(std::uint64_t seed, std::size_t total_tokens) {
    Rng rng(seed);
    const std::vector<std::pair<std::string, std::string>> collocations{
        {"social", "distancing"}, {"stay", "home"}, {"face", "mask"}, {"panic", "attack"}};
    std::vector<TokenDoc> docs;
    std::size_t n = 0;
    while (n < total_tokens) {
        TokenDoc d{"d" + std::to_string(docs.size()), {}};
        const std::size_t len = std::min<std::size_t>(3 + rng.below(15), total_tokens - n);
        while (d.tokens.size() < len) {
            if (rng.uniform() < 0.2 && d.tokens.size() + 2 <= len) {
                const auto& c = collocations[rng.below(collocations.size())];
                d.tokens.push_back(c.first);
                d.tokens.push_back(c.second);
            } else {
                // Zipf-ish filler over 150 words.
                const auto r = static_cast<int>(150 * rng.uniform() * rng.uniform());
                d.tokens.push_back("w" + std::to_string(r));
            }
        }
        n += d.tokens.size();
        docs.push_back(std::move(d));
    }
    return docs;
}

}  // namespace

TEST_CASE("tokenize") {
    CHECK(tokenize("I can't leave the house!") == std::vector<std::string>{"leave", "house"});
    CHECK(tokenize("COVID-19 cases rising") == std::vector<std::string>{"covid-19", "cases", "rising"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("2020 was 19-20 --covid-- a") == std::vector<std::string>{"covid"});
    CHECK(tokenize("snake_case x2 ab") == std::vector<std::string>{"snake", "case", "x2", "ab"});
    CHECK(tokenize("the house", StopwordSet{"house"}) == std::vector<std::string>{"the"});
}

TEST_CASE("phrase_score by hand") {
    CHECK(phrase_score(5, 10, 10, 100, 1.0) == doctest::Approx(4.0));
    CHECK(phrase_score(1, 3, 3, 100, 1.0) == 0.0);
}

TEST_CASE("mine_phrases matches the brute-force counter") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto docs = random_corpus(seed, 1000);
        const auto table = mine_phrases(docs, {5.0, 1.0, 3});
        const auto expected = brute_force_scores(docs, 5.0, 1.0);
        CHECK(table.entries == expected);
        CHECK(!expected.empty());
        for (const auto& [pair, s] : table.entries) CHECK(s >= 1.0);
    }
}

TEST_CASE("pairs never cross document boundaries") {
    const auto docs = docs_of({{"alpha", "beta"}, {"gamma", "delta"}});
    const auto table = mine_phrases(docs, {0.0, 0.0, 3});
    CHECK(table.contains("alpha", "beta"));
    CHECK_FALSE(table.contains("beta", "gamma"));
}

TEST_CASE("two passes build a trigram from a repeated phrase") {
    std::vector<std::vector<std::string>> tokens;
    for (int i = 0; i < 50; ++i) tokens.push_back({"social", "distancing", "order"});
    std::vector<std::string> filler;
    for (int i = 0; i < 600; ++i) filler.push_back("f" + std::to_string(i));
    tokens.push_back(filler);
    const auto docs = docs_of(tokens);
    const auto model = learn_phrases(docs, {}, 2);
    REQUIRE(model.passes.size() == 2);
    CHECK(model.passes[0].contains("social", "distancing"));
    CHECK(model.passes[1].contains("social_distancing", "order"));
    CHECK(model.apply(docs[0]).tokens == std::vector<std::string>{"social_distancing_order"});
}

TEST_CASE("apply_phrases is left-greedy") {
    PhraseTable t;
    t.entries[{"a", "b"}] = 20;
    t.entries[{"b", "c"}] = 30;
    CHECK(apply_phrases({"x", {"a", "b", "c"}}, t).tokens == std::vector<std::string>{"a_b", "c"});
    CHECK(apply_phrases({"x", {"practice", "social"}}, PhraseTable{1, 5, 10, {{{"practice", "social"}, 12.0}}}).tokens ==
          std::vector<std::string>{"practice_social"});
    const TokenDoc d{"x", {"a", "b", "c"}};
    CHECK(apply_phrases(d, PhraseTable{}) == d);
}

TEST_CASE("apply preserves characters and never grows; trigram depth is capped") {
    const auto docs = random_corpus(7, 3000);
    const auto model = learn_phrases(docs, {5.0, 2.0, 3}, 2);
    for (const auto& d : docs) {
        const auto out = model.apply(d);
        CHECK(out.tokens.size() <= d.tokens.size());
        std::string before, after;
        for (const auto& t : d.tokens) before += t;
        for (const auto& t : out.tokens)
            for (char c : t)
                if (c != '_') after += c;
        CHECK(before == after);
        for (const auto& t : out.tokens) CHECK(std::count(t.begin(), t.end(), '_') <= 2);
    }
}

TEST_CASE("phrase table TSV round-trip") {
    const auto docs = random_corpus(4, 1000);
    const auto table = mine_phrases(docs, {5.0, 1.0, 3}, 2);
    std::ostringstream out;
    write_phrase_table(table, out);
    std::istringstream in(out.str());
    const auto back = read_phrase_table(in);
    CHECK(back.pass_number == 2);
    CHECK(back.delta == 5.0);
    CHECK(back.threshold == 1.0);
    CHECK(back.entries == table.entries);
    std::istringstream bad("a\tb\n");
    CHECK_THROWS_AS(read_phrase_table(bad), ParseError);
}
