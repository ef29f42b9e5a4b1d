#include "topicorr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "topicorr/error.hpp"
#include "topicorr/rng.hpp"

namespace topicorr {

namespace {

std::string letters(int n) {
    std::string s;
    do {
        s.insert(s.begin(), static_cast<char>('a' + n % 26));
        n /= 26;
    } while (n > 0);
    return s;
}

std::vector<double> zipf_cdf(int n, double exponent) {
    std::vector<double> cdf(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += 1.0 / std::pow(i + 1.0, exponent);
        cdf[static_cast<std::size_t>(i)] = acc;
    }
    for (auto& c : cdf) c /= acc;
    return cdf;
}

std::size_t draw_cdf(const std::vector<double>& cdf, Rng& rng) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<double> dirichlet(const std::vector<double>& weights, Rng& rng) {
    std::vector<double> theta(weights.size());
    double total = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) total += theta[k] = rng.gamma(weights[k]);
    if (total <= 0.0) {
        // Every draw underflowed; fall back to a single topic.
        std::fill(theta.begin(), theta.end(), 0.0);
        theta[rng.below(theta.size())] = 1.0;
        return theta;
    }
    for (auto& t : theta) t /= total;
    return theta;
}

std::size_t draw_discrete(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc) return k;
    }
    return probs.size() - 1;
}

struct DocDraw {
    std::vector<std::pair<int, int>> words;  // (topic, rank)
    std::int64_t created_utc;
};

// Draws the latent structure of one stream: per month, per document.
std::vector<std::vector<DocDraw>> draw_stream(const SyntheticSpec& spec, Rng& rng) {
    const auto cdf = zipf_cdf(spec.vocab_size, spec.zipf_exponent);
    const std::vector<double> default_weights(static_cast<std::size_t>(spec.num_topics), 0.1);
    std::vector<std::vector<DocDraw>> months;
    for (std::size_t m = 0; m < spec.months.size(); ++m) {
        const auto& weights = spec.mixture_schedule.empty()        ? default_weights
                              : spec.mixture_schedule.size() == 1 ? spec.mixture_schedule[0]
                                                                   : spec.mixture_schedule[m];
        const YearMonth ym = spec.months[m];
        const auto span = static_cast<std::uint64_t>(ym.last_second() - ym.first_second() + 1);
        std::vector<DocDraw> docs;
        for (int d = 0; d < spec.docs_per_month; ++d) {
            DocDraw doc;
            doc.created_utc = ym.first_second() + static_cast<std::int64_t>(rng.below(span));
            const auto theta = dirichlet(weights, rng);
            for (int n = 0; n < spec.doc_length; ++n) {
                const int topic = static_cast<int>(draw_discrete(theta, rng));
                const int rank = static_cast<int>(draw_cdf(cdf, rng));
                doc.words.emplace_back(topic, rank);
            }
            docs.push_back(std::move(doc));
        }
        months.push_back(std::move(docs));
    }
    return months;
}

Corpus realize(const SyntheticSpec& spec, const std::vector<std::vector<DocDraw>>& draws, bool stream_a,
               Rng& plant_rng) {
    const std::string& sub = stream_a ? spec.subreddit_a : spec.subreddit_b;
    std::vector<Posting> postings;
    for (std::size_t m = 0; m < draws.size(); ++m) {
        const double rho = spec.overlap_schedule.empty() ? spec.overlap : spec.overlap_schedule[m];
        const auto n_docs = draws[m].size();
        std::vector<std::vector<std::string>> tokens(n_docs);
        for (std::size_t d = 0; d < n_docs; ++d)
            for (auto [topic, rank] : draws[m][d].words)
                tokens[d].push_back(synthetic_token(stream_a, topic, rank, rho));

        for (const auto& planted : spec.planted_keywords) {
            const auto target = static_cast<std::size_t>(std::llround(planted.rate * static_cast<double>(n_docs)));
            std::vector<std::size_t> order(n_docs);
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (std::size_t i = 0; i < std::min(target, n_docs); ++i) {
                std::swap(order[i], order[i + plant_rng.below(n_docs - i)]);
                auto& doc = tokens[order[i]];
                doc.insert(doc.begin() + static_cast<std::ptrdiff_t>(plant_rng.below(doc.size() + 1)), planted.term);
            }
        }

        const YearMonth ym = spec.months[m];
        for (std::size_t d = 0; d < n_docs; ++d) {
            char id[64];
            std::snprintf(id, sizeof id, "-%04d%02d-%05zu", ym.year, ym.month, d);
            Posting p;
            p.id = sub + id;
            p.subreddit = sub;
            p.created_utc = draws[m][d].created_utc;
            for (std::size_t i = 0; i < tokens[d].size(); ++i) {
                if (i) p.body += ' ';
                p.body += tokens[d][i];
            }
            postings.push_back(std::move(p));
        }
    }
    return Corpus(std::move(postings));
}

}  // namespace

void SyntheticSpec::validate() const {
    if (num_topics < 1) throw Error("synthetic: num_topics must be >= 1");
    if (vocab_size < 1) throw Error("synthetic: vocab_size must be >= 1");
    if (docs_per_month < 0) throw Error("synthetic: docs_per_month must be >= 0");
    if (doc_length < 1) throw Error("synthetic: doc_length must be >= 1");
    if (months.empty()) throw Error("synthetic: months must be nonempty");
    if (overlap < 0.0 || overlap > 1.0) throw Error("synthetic: overlap must lie in [0, 1]");
    if (!overlap_schedule.empty()) {
        if (overlap_schedule.size() != months.size())
            throw Error("synthetic: overlap_schedule length must equal the number of months");
        for (double r : overlap_schedule)
            if (r < 0.0 || r > 1.0) throw Error("synthetic: overlap_schedule entries must lie in [0, 1]");
    }
    if (mixture_schedule.size() > 1 && mixture_schedule.size() != months.size())
        throw Error("synthetic: mixture_schedule must have 1 or months.size() entries");
    for (const auto& w : mixture_schedule) {
        if (w.size() != static_cast<std::size_t>(num_topics))
            throw Error("synthetic: mixture weights must have num_topics entries");
        for (double x : w)
            if (!(x > 0.0)) throw Error("synthetic: mixture weights must be positive");
    }
    for (const auto& p : planted_keywords)
        if (p.term.empty() || p.rate < 0.0 || p.rate > 1.0) throw Error("synthetic: invalid planted keyword");
    if (subreddit_a == subreddit_b) throw Error("synthetic: stream names must differ");
}

bool synthetic_rank_shared(int rank, double overlap) {
    constexpr double eps = 1e-9;
    return std::floor((rank + 1) * overlap + eps) > std::floor(rank * overlap + eps);
}

std::string synthetic_token(bool stream_a, int topic, int rank, double overlap) {
    const bool reference_spelling = !stream_a || synthetic_rank_shared(rank, overlap);
    return std::string(reference_spelling ? "r" : "m") + "t" + letters(topic) + "w" + letters(rank);
}

std::vector<std::pair<std::string, double>> synthetic_topic(const SyntheticSpec& spec, int topic) {
    const auto cdf = zipf_cdf(spec.vocab_size, spec.zipf_exponent);
    std::vector<std::pair<std::string, double>> out;
    double prev = 0.0;
    for (int i = 0; i < spec.vocab_size; ++i) {
        out.emplace_back(synthetic_token(false, topic, i, 0.0), cdf[static_cast<std::size_t>(i)] - prev);
        prev = cdf[static_cast<std::size_t>(i)];
    }
    return out;
}

SyntheticPair generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    // Streams are seeded by name so the same reference stream comes out of
    // every generation that shares the seed.
    Rng rng_a(splitmix64(seed ^ fnv1a64("draw/" + spec.subreddit_a)));
    Rng rng_b(splitmix64(seed ^ fnv1a64("draw/" + spec.subreddit_b)));
    Rng plant_a(splitmix64(seed ^ fnv1a64("plant/" + spec.subreddit_a)));
    Rng plant_b(splitmix64(seed ^ fnv1a64("plant/" + spec.subreddit_b)));
    const auto draws_a = draw_stream(spec, rng_a);
    const auto draws_b = draw_stream(spec, rng_b);
    return {realize(spec, draws_a, true, plant_a), realize(spec, draws_b, false, plant_b)};
}

SyntheticBundle parse_synthetic_bundle(const nlohmann::json& doc) {
    using nlohmann::json;
    static const std::set<std::string> allowed{"seed", "range", "num_topics", "vocab_size", "docs_per_month",
                                               "doc_length", "zipf_exponent", "mixture", "planted_keywords",
                                               "reference", "streams", "description"};
    if (!doc.is_object()) throw ConfigError("<root>", "must be an object");
    for (const auto& [key, _] : doc.items())
        if (!allowed.contains(key)) throw ConfigError(key, "unknown key");

    SyntheticBundle b;
    auto& spec = b.base;
    auto get = [&](const json& obj, const std::string& key, auto fallback, const std::string& path) {
        using T = decltype(fallback);
        if (!obj.contains(key)) return fallback;
        try {
            return obj.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path, "has the wrong type");
        }
    };
    b.seed = get(doc, "seed", std::uint64_t{0}, "seed");
    spec.num_topics = get(doc, "num_topics", spec.num_topics, "num_topics");
    spec.vocab_size = get(doc, "vocab_size", spec.vocab_size, "vocab_size");
    spec.docs_per_month = get(doc, "docs_per_month", spec.docs_per_month, "docs_per_month");
    spec.doc_length = get(doc, "doc_length", spec.doc_length, "doc_length");
    spec.zipf_exponent = get(doc, "zipf_exponent", spec.zipf_exponent, "zipf_exponent");

    if (!doc.contains("range") || !doc.at("range").is_object()) throw ConfigError("range", "is required");
    try {
        const auto start = YearMonth::parse(get(doc.at("range"), "start", std::string(), "range.start"));
        const auto end = YearMonth::parse(get(doc.at("range"), "end", std::string(), "range.end"));
        if (end < start) throw ConfigError("range", "start is after end");
        spec.months = months_between(start, end);
    } catch (const ParseError& e) {
        throw ConfigError("range", e.what());
    }

    if (doc.contains("mixture")) {
        const auto& m = doc.at("mixture");
        if (m.is_array() && !m.empty() && m.at(0).is_array())
            spec.mixture_schedule = get(doc, "mixture", spec.mixture_schedule, "mixture");
        else
            spec.mixture_schedule = {get(doc, "mixture", std::vector<double>{}, "mixture")};
    }
    if (doc.contains("planted_keywords")) {
        const auto& list = doc.at("planted_keywords");
        if (!list.is_array()) throw ConfigError("planted_keywords", "must be an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string path = "planted_keywords[" + std::to_string(i) + "]";
            spec.planted_keywords.push_back(
                {get(list[i], "term", std::string(), path + ".term"), get(list[i], "rate", 0.0, path + ".rate")});
        }
    }

    b.reference = get(doc, "reference", std::string(), "reference");
    if (b.reference.empty()) throw ConfigError("reference", "is required");
    if (!doc.contains("streams") || !doc.at("streams").is_array() || doc.at("streams").empty())
        throw ConfigError("streams", "must be a nonempty array");
    for (std::size_t i = 0; i < doc.at("streams").size(); ++i) {
        const auto& s = doc.at("streams")[i];
        const std::string path = "streams[" + std::to_string(i) + "]";
        SyntheticBundle::Stream stream;
        stream.name = get(s, "name", std::string(), path + ".name");
        if (stream.name.empty() || stream.name == b.reference) throw ConfigError(path + ".name", "invalid stream name");
        stream.overlap_schedule.assign(spec.months.size(), get(s, "overlap", 0.0, path + ".overlap"));
        if (s.contains("schedule")) {
            const auto schedule = get(s, "schedule", std::map<std::string, double>{}, path + ".schedule");
            for (const auto& [month, rho] : schedule) {
                YearMonth ym;
                try {
                    ym = YearMonth::parse(month);
                } catch (const ParseError& e) {
                    throw ConfigError(path + ".schedule", e.what());
                }
                const auto it = std::find(spec.months.begin(), spec.months.end(), ym);
                if (it == spec.months.end()) throw ConfigError(path + ".schedule", month + " is outside the range");
                stream.overlap_schedule[static_cast<std::size_t>(it - spec.months.begin())] = rho;
            }
        }
        b.streams.push_back(std::move(stream));
    }

    for (const auto& stream : b.streams) {
        SyntheticSpec check = spec;
        check.subreddit_a = stream.name;
        check.subreddit_b = b.reference;
        check.overlap_schedule = stream.overlap_schedule;
        try {
            check.validate();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError("streams", e.what());
        }
    }
    return b;
}

std::map<std::string, Corpus> generate_bundle(const SyntheticBundle& bundle) {
    std::map<std::string, Corpus> out;
    for (const auto& stream : bundle.streams) {
        SyntheticSpec spec = bundle.base;
        spec.subreddit_a = stream.name;
        spec.subreddit_b = bundle.reference;
        spec.overlap_schedule = stream.overlap_schedule;
        auto pair = generate_synthetic(spec, bundle.seed);
        out.insert_or_assign(stream.name, std::move(pair.a));
        out.insert_or_assign(bundle.reference, std::move(pair.b));
    }
    return out;
}

}  // namespace topicorr
