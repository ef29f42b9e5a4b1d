#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "topicorr/corpus.hpp"
#include "topicorr/month.hpp"

namespace topicorr {

struct PlantedKeyword {
    std::string term;
    double rate = 0.0;  // exactly round(rate * docs_per_month) documents per month and stream
};

// Two streams of postings drawn from per-topic Zipfian unigram distributions.
// Stream B is the reference stream and does not depend on the overlap; in
// stream A the rank-i word of topic t is spelled like B's rank-i word of
// topic t when i falls in the shared fraction, and has its own spelling
// otherwise.
struct SyntheticSpec {
    int num_topics = 3;
    int vocab_size = 30;  // per topic
    int docs_per_month = 100;
    std::vector<YearMonth> months;
    int doc_length = 50;
    // Dirichlet weights per month (size 1 applies to every month; empty means 0.1 per topic).
    std::vector<std::vector<double>> mixture_schedule;
    double overlap = 0.0;  // rho in [0, 1]
    // Per-month overlap; when nonempty it overrides `overlap` and must match months.size().
    std::vector<double> overlap_schedule;
    std::vector<PlantedKeyword> planted_keywords;
    double zipf_exponent = 1.0;
    std::string subreddit_a = "stream-a";
    std::string subreddit_b = "stream-b";

    // Throws Error when an invariant is violated.
    void validate() const;
};

// Token used by a stream for (topic, rank) at a given overlap.
std::string synthetic_token(bool stream_a, int topic, int rank, double overlap);
bool synthetic_rank_shared(int rank, double overlap);

// Planted distribution of topic `topic`: (reference token, probability) ordered by rank.
std::vector<std::pair<std::string, double>> synthetic_topic(const SyntheticSpec& spec, int topic);

struct SyntheticPair {
    Corpus a;
    Corpus b;
};

SyntheticPair generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// Several streams paired against one reference stream. Every stream is
// generated with the same seed and base spec, so the reference corpus is the
// same in each generation.
struct SyntheticBundle {
    struct Stream {
        std::string name;
        std::vector<double> overlap_schedule;  // one entry per month
    };

    std::uint64_t seed = 0;
    SyntheticSpec base;
    std::string reference;
    std::vector<Stream> streams;
};

// {"seed", "range": {"start","end"}, "num_topics", "vocab_size",
//  "docs_per_month", "doc_length", "zipf_exponent", "mixture",
//  "planted_keywords": [{"term","rate"}], "reference",
//  "streams": [{"name", "overlap", "schedule": {"YYYY-MM": rho}}]}
// Throws ConfigError naming the offending key.
SyntheticBundle parse_synthetic_bundle(const nlohmann::json& doc);

// Corpora keyed by stream name, the reference included.
std::map<std::string, Corpus> generate_bundle(const SyntheticBundle& bundle);

}  // namespace topicorr
