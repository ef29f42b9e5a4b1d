#include "topicorr/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "topicorr/chart.hpp"
#include "topicorr/error.hpp"
#include "topicorr/format.hpp"
#include "topicorr/rng.hpp"

namespace topicorr {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t derive_seed(std::uint64_t master, const std::string& stage, const std::string& stream,
                          const std::string& month, int k) {
    std::string material = std::to_string(master);
    for (const std::string* part : {&stage, &stream, &month}) {
        material += '\x1f';
        material += *part;
    }
    material += '\x1f';
    material += std::to_string(k);
    return splitmix64(fnv1a64(material));
}

std::string sanitize_name(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '@' || c == '.';
        out += ok ? c : '_';
    }
    return out.empty() ? "_" : out;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

class ConfigReader {
public:
    ConfigReader(const json& obj, std::string prefix, std::set<std::string> allowed)
        : obj_(obj), prefix_(std::move(prefix)) {
        if (!obj_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "must be an object");
        for (const auto& [key, _] : obj_.items())
            if (!allowed.contains(key)) throw ConfigError(path(key), "unknown key");
    }

    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
    bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
    const json& at(const std::string& key) const { return obj_.at(key); }

    template <typename T>
    T get(const std::string& key, T fallback) const {
        if (!has(key)) return fallback;
        try {
            return obj_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path(key), "has the wrong type");
        }
    }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        if (!obj_.at(key).is_number()) throw ConfigError(path(key), "must be a number");
        return obj_.at(key).get<double>();
    }

    int integer(const std::string& key, int fallback, int min_value) const {
        if (!has(key)) return fallback;
        if (!obj_.at(key).is_number_integer()) throw ConfigError(path(key), "must be an integer");
        const auto v = obj_.at(key).get<std::int64_t>();
        if (v < min_value) throw ConfigError(path(key), "must be at least " + std::to_string(min_value));
        return static_cast<int>(v);
    }

    std::string string(const std::string& key, std::string fallback) const {
        if (!has(key)) return fallback;
        if (!obj_.at(key).is_string()) throw ConfigError(path(key), "must be a string");
        return obj_.at(key).get<std::string>();
    }

private:
    const json& obj_;
    std::string prefix_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

void require_file(bool check, const fs::path& p, const std::string& key) {
    if (check && !fs::is_regular_file(p)) throw ConfigError(key, "file not found: " + p.string());
}

YearMonth config_month(const ConfigReader& r, const std::string& key) {
    if (!r.has(key)) throw ConfigError(r.path(key), "is required");
    try {
        return YearMonth::parse(r.string(key, ""));
    } catch (const ParseError& e) {
        throw ConfigError(r.path(key), e.what());
    }
}

}  // namespace

std::string RunConfig::hash() const {
    json stable = source;
    if (stable.is_object()) {
        stable.erase("output_dir");
        stable.erase("jobs");
        stable["seed"] = seed;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(stable.dump())));
    return buf;
}

std::vector<YearMonth> RunConfig::model_months() const {
    if (periods.empty()) return months_between(start, end);
    std::vector<YearMonth> out;
    for (const auto& p : periods) out.push_back(p.start);
    return out;
}

RunConfig parse_config(const json& doc, const fs::path& base_dir, bool check_paths) {
    RunConfig cfg;
    cfg.source = doc;
    ConfigReader root(doc, "",
                      {"seed", "range", "streams", "lexicons", "pairs", "phrases", "lda", "embedding", "tsne",
                       "correlation", "output_dir", "jobs", "description", "periods"});

    if (root.has("seed")) {
        if (!doc.at("seed").is_number_unsigned() && !(doc.at("seed").is_number_integer() && doc.at("seed").get<std::int64_t>() >= 0))
            throw ConfigError("seed", "must be a nonnegative integer");
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }
    cfg.jobs = root.integer("jobs", 1, 1);
    cfg.output_dir = resolve(base_dir, root.string("output_dir", "out"));

    if (!root.has("range")) throw ConfigError("range", "is required");
    {
        ConfigReader r(doc.at("range"), "range", {"start", "end"});
        cfg.start = config_month(r, "start");
        cfg.end = config_month(r, "end");
        if (cfg.end < cfg.start) throw ConfigError("range", "start is after end");
    }
    if (root.has("periods")) {
        const auto& periods = doc.at("periods");
        if (!periods.is_array() || periods.empty()) throw ConfigError("periods", "must be a nonempty array");
        YearMonth expected = cfg.start;
        for (std::size_t i = 0; i < periods.size(); ++i) {
            const std::string prefix = "periods[" + std::to_string(i) + "]";
            ConfigReader r(periods[i], prefix, {"start", "end"});
            Period p{config_month(r, "start"), config_month(r, "end")};
            if (p.end < p.start) throw ConfigError(prefix, "start is after end");
            if (p.start != expected)
                throw ConfigError(prefix, "periods must be contiguous from range.start, expected start " +
                                              expected.to_string());
            expected = p.end.next();
            cfg.periods.push_back(p);
        }
        if (cfg.periods.back().end != cfg.end) throw ConfigError("periods", "last period must end at range.end");
    }

    if (root.has("lexicons")) {
        const auto& lex = doc.at("lexicons");
        if (!lex.is_object()) throw ConfigError("lexicons", "must be an object of name -> path");
        for (const auto& [name, value] : lex.items()) {
            const std::string key = "lexicons." + name;
            if (!value.is_string()) throw ConfigError(key, "must be a path string");
            const fs::path p = resolve(base_dir, value.get<std::string>());
            require_file(check_paths, p, key);
            cfg.lexicons.emplace(name, p);
        }
    }

    if (!root.has("streams") || !doc.at("streams").is_array() || doc.at("streams").empty())
        throw ConfigError("streams", "must be a nonempty array");
    std::set<std::string> stream_names;
    for (std::size_t i = 0; i < doc.at("streams").size(); ++i) {
        const std::string prefix = "streams[" + std::to_string(i) + "]";
        ConfigReader r(doc.at("streams")[i], prefix, {"name", "path", "archive"});
        StreamSource s;
        s.name = r.string("name", "");
        if (s.name.empty()) throw ConfigError(r.path("name"), "is required");
        if (!stream_names.insert(s.name).second) throw ConfigError(r.path("name"), "duplicate stream name");
        if (r.has("path") == r.has("archive")) throw ConfigError(prefix, "needs exactly one of 'path' or 'archive'");
        if (r.has("path")) {
            s.path = resolve(base_dir, r.string("path", ""));
            require_file(check_paths, *s.path, r.path("path"));
        } else {
            ConfigReader a(r.at("archive"), r.path("archive"),
                           {"endpoint", "subreddit", "query", "after", "before", "page_size", "min_interval_ms"});
            ArchiveQuery q;
            q.endpoint = a.string("endpoint", "");
            q.subreddit = a.string("subreddit", s.name);
            q.query = a.string("query", "");
            q.after = a.get<std::int64_t>("after", cfg.start.first_second());
            q.before = a.get<std::int64_t>("before", cfg.end.last_second() + 1);
            q.page_size = a.integer("page_size", 100, 1);
            s.min_request_interval = std::chrono::milliseconds(a.integer("min_interval_ms", 1000, 0));
            s.archive = q;
        }
        cfg.streams.push_back(std::move(s));
    }

    if (!root.has("pairs") || !doc.at("pairs").is_array() || doc.at("pairs").empty())
        throw ConfigError("pairs", "must be a nonempty array");
    for (std::size_t i = 0; i < doc.at("pairs").size(); ++i) {
        const std::string prefix = "pairs[" + std::to_string(i) + "]";
        ConfigReader r(doc.at("pairs")[i], prefix, {"a", "b", "a_lexicon", "b_lexicon"});
        PairSpec p;
        p.a = r.string("a", "");
        p.b = r.string("b", "");
        for (const auto& [key, name] : {std::pair{"a", p.a}, std::pair{"b", p.b}})
            if (!stream_names.contains(name)) throw ConfigError(r.path(key), "unknown stream '" + name + "'");
        if (p.a == p.b) throw ConfigError(prefix, "a pair needs two different streams");
        if (r.has("a_lexicon")) p.lexicon_a = r.string("a_lexicon", "");
        if (r.has("b_lexicon")) p.lexicon_b = r.string("b_lexicon", "");
        for (const auto& [key, lex] : {std::pair{"a_lexicon", p.lexicon_a}, std::pair{"b_lexicon", p.lexicon_b}})
            if (lex && !cfg.lexicons.contains(*lex)) throw ConfigError(r.path(key), "unknown lexicon '" + *lex + "'");
        cfg.pairs.push_back(std::move(p));
    }

    if (root.has("phrases")) {
        ConfigReader r(doc.at("phrases"), "phrases", {"delta", "threshold", "passes", "stopwords"});
        cfg.phrases.params.delta = r.number("delta", cfg.phrases.params.delta);
        cfg.phrases.params.threshold = r.number("threshold", cfg.phrases.params.threshold);
        cfg.phrases.passes = r.integer("passes", cfg.phrases.passes, 0);
        if (cfg.phrases.params.delta < 0) throw ConfigError("phrases.delta", "must be nonnegative");
        if (!(cfg.phrases.params.threshold > 0)) throw ConfigError("phrases.threshold", "must be positive");
        if (cfg.phrases.passes > 2) throw ConfigError("phrases.passes", "at most 2 passes (trigrams)");
        if (r.has("stopwords")) {
            cfg.phrases.stopwords = resolve(base_dir, r.string("stopwords", ""));
            require_file(check_paths, *cfg.phrases.stopwords, "phrases.stopwords");
        }
    }

    if (root.has("lda")) {
        ConfigReader r(doc.at("lda"), "lda",
                       {"k_grid", "alpha", "beta", "iterations", "burn_in", "sample_lag", "seeds", "k_top",
                        "coherence", "npmi_window"});
        auto& lda = cfg.lda;
        if (r.has("k_grid")) {
            lda.k_grid = r.get<std::vector<int>>("k_grid", {});
            if (lda.k_grid.empty()) throw ConfigError("lda.k_grid", "must be nonempty");
            for (int k : lda.k_grid)
                if (k < 1) throw ConfigError("lda.k_grid", "topic counts must be at least 1");
        }
        if (r.has("alpha")) {
            try {
                lda.alpha = r.at("alpha").is_number() ? AlphaRule{r.at("alpha").get<double>(), false}
                                                      : AlphaRule::parse(r.string("alpha", ""));
            } catch (const ParseError& e) {
                throw ConfigError("lda.alpha", e.what());
            }
            if (!(lda.alpha.value > 0)) throw ConfigError("lda.alpha", "must be positive");
        }
        lda.beta = r.number("beta", lda.beta);
        if (!(lda.beta > 0)) throw ConfigError("lda.beta", "must be positive");
        lda.iterations = r.integer("iterations", lda.iterations, 1);
        lda.burn_in = r.integer("burn_in", lda.burn_in, 0);
        lda.sample_lag = r.integer("sample_lag", lda.sample_lag, 1);
        lda.replicates = r.integer("seeds", lda.replicates, 1);
        lda.k_top = r.integer("k_top", lda.k_top, 1);
        lda.npmi_window = static_cast<std::size_t>(r.integer("npmi_window", static_cast<int>(lda.npmi_window), 2));
        const std::string metric = r.string("coherence", "umass");
        if (metric == "umass") lda.metric = CoherenceMetric::umass;
        else if (metric == "npmi") lda.metric = CoherenceMetric::npmi;
        else throw ConfigError("lda.coherence", "must be 'umass' or 'npmi'");
    }

    if (root.has("embedding")) {
        ConfigReader r(doc.at("embedding"), "embedding", {"provider", "sgns"});
        cfg.embedding.provider = r.string("provider", "sgns");
        if (r.has("sgns")) {
            ConfigReader s(r.at("sgns"), "embedding.sgns",
                           {"dim", "window", "negatives", "epochs", "learning_rate", "min_count"});
            auto& p = cfg.embedding.sgns;
            p.dim = static_cast<std::size_t>(s.integer("dim", static_cast<int>(p.dim), 2));
            p.window = s.integer("window", p.window, 1);
            p.negatives = s.integer("negatives", p.negatives, 0);
            p.epochs = s.integer("epochs", p.epochs, 1);
            p.learning_rate = s.number("learning_rate", p.learning_rate);
            p.min_count = static_cast<std::size_t>(s.integer("min_count", static_cast<int>(p.min_count), 1));
        }
    }
    if (cfg.embedding.provider.rfind("table:", 0) == 0) {
        const std::string p = cfg.embedding.provider.substr(6);
        if (p.empty()) throw ConfigError("embedding.provider", "table provider needs a path");
        cfg.embedding.table_path = resolve(base_dir, p);
        require_file(check_paths, *cfg.embedding.table_path, "embedding.provider");
    } else if (cfg.embedding.provider != "sgns") {
        throw ConfigError("embedding.provider", "must be 'sgns' or 'table:<path>'");
    }

    if (root.has("tsne")) {
        ConfigReader r(doc.at("tsne"), "tsne", {"enabled", "out_dim", "perplexity", "iterations", "learning_rate"});
        cfg.tsne.enabled = r.get<bool>("enabled", true);
        cfg.tsne.params.out_dim = static_cast<std::size_t>(r.integer("out_dim", static_cast<int>(cfg.tsne.params.out_dim), 1));
        if (r.has("perplexity")) {
            cfg.tsne.params.perplexity = r.number("perplexity", 5.0);
            if (*cfg.tsne.params.perplexity < 1.0) throw ConfigError("tsne.perplexity", "must be at least 1");
        }
        cfg.tsne.params.iterations = r.integer("iterations", cfg.tsne.params.iterations, 0);
        cfg.tsne.params.learning_rate = r.number("learning_rate", cfg.tsne.params.learning_rate);
    }

    if (root.has("correlation")) {
        ConfigReader r(doc.at("correlation"), "correlation", {"methods", "method"});
        std::vector<std::string> names;
        if (r.has("methods")) names = r.get<std::vector<std::string>>("methods", {});
        if (r.has("method")) names.push_back(r.string("method", ""));
        if (names.empty()) throw ConfigError("correlation.methods", "must be nonempty");
        cfg.methods.clear();
        for (const auto& n : names) {
            try {
                cfg.methods.push_back(parse_pair_method(n));
            } catch (const Error& e) {
                throw ConfigError("correlation.methods", e.what());
            }
        }
    }
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

// ---------------------------------------------------------------------------
// Stages

namespace {

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex m;
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w)
        threads.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(m);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::string describe_model(const std::string& view, const MonthModel& m) {
    std::string line = "topics " + view + " " + m.month.to_string() + ": " + std::to_string(m.num_docs) + " docs";
    if (!m.selection) return line + ", no topics";
    line += ", K=" + std::to_string(m.selection->best_k) + " (";
    for (std::size_t i = 0; i < m.selection->scores.size(); ++i) {
        if (i) line += ' ';
        line += std::to_string(m.selection->scores[i].num_topics) + ":" +
                format_double(m.selection->scores[i].mean_coherence);
    }
    return line + ")";
}

bool all_zero(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

std::vector<MonthDocs> prepare_documents(const Corpus& corpus, YearMonth start, YearMonth end,
                                         const PhraseOptions& options, const StopwordSet& stopwords,
                                         const std::vector<Period>& periods) {
    std::vector<MonthDocs> out;
    for (auto& bucket : bucket_by_month(corpus, start, end).buckets) {
        // Label by the enclosing period; buckets arrive in month order.
        YearMonth label = bucket.month;
        for (const auto& p : periods)
            if (!(bucket.month < p.start) && !(p.end < bucket.month)) label = p.start;
        if (out.empty() || out.back().month != label) out.push_back(MonthDocs{label, {}, {}});
        for (const auto& p : bucket.postings) out.back().docs.push_back({p.id, tokenize(p.text(), stopwords)});
    }
    for (auto& md : out) {
        if (options.passes > 0 && !md.docs.empty()) {
            md.phrases = learn_phrases(md.docs, options.params, options.passes);
            for (auto& d : md.docs) d = md.phrases.apply(d);
        }
    }
    return out;
}

MonthModel model_month(const MonthDocs& docs, const LdaOptions& options, std::uint64_t master_seed,
                       const std::string& view, int jobs) {
    MonthModel mm;
    mm.month = docs.month;
    std::vector<TokenDoc> nonempty;
    for (const auto& d : docs.docs)
        if (!d.tokens.empty()) nonempty.push_back(d);
    mm.num_docs = nonempty.size();
    if (nonempty.empty()) return mm;

    SelectParams sp;
    sp.k_grid = options.k_grid;
    sp.alpha = options.alpha;
    sp.beta = options.beta;
    sp.iterations = options.iterations;
    sp.burn_in = options.burn_in;
    sp.sample_lag = options.sample_lag;
    sp.seeds.assign(static_cast<std::size_t>(options.replicates), 0);
    const std::string month = docs.month.to_string();
    sp.seed_fn = [&](int k, std::size_t replicate) {
        return derive_seed(master_seed, "lda#" + std::to_string(replicate), view, month, k);
    };
    sp.metric = options.metric;
    sp.k_top = options.k_top;
    sp.npmi_window = options.npmi_window;
    sp.jobs = jobs;
    mm.selection = select_k(nonempty, sp);
    for (int k = 0; k < mm.selection->model.num_topics; ++k)
        mm.topics.push_back(top_keywords(mm.selection->model, k, options.k_top));
    return mm;
}

PairMonthVectors embed_month(const std::vector<TopicSummary>& a, const std::vector<TopicSummary>& b,
                             const EmbeddingTable& table, int k_top, const TsneOptions& tsne, std::uint64_t seed) {
    PairMonthVectors out;
    for (const auto& s : a) {
        auto tv = topic_vector(s, table, k_top);
        if (all_zero(tv.raw)) ++out.degenerate_a;
        else out.topics.a.push_back(std::move(tv.raw));
    }
    for (const auto& s : b) {
        auto tv = topic_vector(s, table, k_top);
        if (all_zero(tv.raw)) ++out.degenerate_b;
        else out.topics.b.push_back(std::move(tv.raw));
    }
    out.topics.space = "raw";
    const std::size_t n = out.topics.a.size() + out.topics.b.size();
    if (!tsne.enabled || out.topics.a.empty() || out.topics.b.empty()) return out;

    VectorSet joint = out.topics.a;
    joint.insert(joint.end(), out.topics.b.begin(), out.topics.b.end());
    TsneParams params = tsne.params;
    params.seed = seed;
    auto reduced = tsne_reduce(joint, params);
    out.passthrough = reduced.passthrough;
    if (reduced.passthrough) return out;
    const auto na = out.topics.a.size();
    out.topics.a.assign(reduced.points.begin(), reduced.points.begin() + static_cast<std::ptrdiff_t>(na));
    out.topics.b.assign(reduced.points.begin() + static_cast<std::ptrdiff_t>(na), reduced.points.begin() + static_cast<std::ptrdiff_t>(n));
    out.topics.space = "reduced";
    return out;
}

PipelineInputs load_inputs(const RunConfig& config) {
    PipelineInputs in;
    const char* override_endpoint = std::getenv("TOPICORR_ARCHIVE_ENDPOINT");
    for (const auto& s : config.streams) {
        if (s.path) {
            in.corpora.emplace(s.name, load_postings(*s.path));
        } else {
            ArchiveQuery q = *s.archive;
            if (override_endpoint && *override_endpoint) q.endpoint = override_endpoint;
            if (q.endpoint.empty())
                throw ConfigError("streams." + s.name + ".archive.endpoint", "no endpoint configured");
            FetchOptions fo;
            fo.min_request_interval = s.min_request_interval;
            in.corpora.emplace(s.name, fetch_postings(q, fo));
        }
    }
    for (const auto& [name, path] : config.lexicons) in.lexicons.emplace(name, load_lexicon(path, name));
    if (config.phrases.stopwords) in.stopwords = load_stopwords(*config.phrases.stopwords);
    if (config.embedding.table_path) in.table = load_table(*config.embedding.table_path);
    return in;
}

std::vector<ViewKey> config_views(const RunConfig& config) {
    std::vector<ViewKey> keys;
    auto add = [&](const std::string& stream, const std::optional<std::string>& lex) {
        for (const auto& k : keys)
            if (k.stream == stream && k.lexicon == lex) return;
        keys.push_back({lex ? stream + "@" + *lex : stream, stream, lex});
    };
    for (const auto& p : config.pairs) {
        add(p.a, p.lexicon_a);
        add(p.b, p.lexicon_b);
    }
    return keys;
}

namespace {

const ViewResult& find_view(const std::vector<ViewResult>& views, const std::string& stream,
                            const std::optional<std::string>& lex) {
    for (const auto& v : views)
        if (v.stream == stream && v.lexicon == lex) return v;
    throw Error("no results for view " + (lex ? stream + "@" + *lex : stream));
}

}  // namespace

EmbeddingTable train_embedding(const RunConfig& config, const std::vector<ViewResult>& views) {
    std::vector<TokenDoc> corpus;
    std::unordered_set<std::string> seen;
    for (const auto& v : views)
        for (const auto& m : v.months)
            for (const auto& d : m.docs)
                if (seen.insert(v.stream + "\n" + d.posting_id).second) corpus.push_back(d);
    SgnsParams sp = config.embedding.sgns;
    sp.seed = derive_seed(config.seed, "sgns", "", "", 0);
    return train_sgns(corpus, sp);
}

std::vector<CorrelationSeries> correlate_views(const RunConfig& config, const std::vector<ViewResult>& views,
                                               const EmbeddingTable& table, std::vector<std::string>* log) {
    std::vector<CorrelationSeries> out;
    for (const auto& spec : config.pairs) {
        const auto& va = find_view(views, spec.a, spec.lexicon_a);
        const auto& vb = find_view(views, spec.b, spec.lexicon_b);
        std::map<YearMonth, const MonthModel*> mb;
        for (const auto& m : vb.models) mb[m.month] = &m;
        const StreamPair pair{spec.a, spec.b};
        std::map<YearMonth, MonthTopics> monthly;
        for (const auto& ma : va.models) {
            if (ma.month < config.start || config.end < ma.month) continue;
            const auto it = mb.find(ma.month);
            static const std::vector<TopicSummary> none;
            const auto& topics_b = it == mb.end() ? none : it->second->topics;
            auto vectors = embed_month(ma.topics, topics_b, table, config.lda.k_top, config.tsne,
                                       derive_seed(config.seed, "tsne", pair.label(), ma.month.to_string(), 0));
            if (log && (vectors.degenerate_a || vectors.degenerate_b))
                log->push_back("correlate " + pair.label() + " " + ma.month.to_string() + ": excluded " +
                               std::to_string(vectors.degenerate_a) + "+" + std::to_string(vectors.degenerate_b) +
                               " all-OOV topic vectors");
            monthly.emplace(ma.month, std::move(vectors.topics));
        }
        for (PairMethod method : config.methods) {
            auto series = build_series(pair, monthly, config.model_months(), method);
            if (log) {
                const auto peak = series.argmax();
                log->push_back("series " + pair.label() + " " + to_string(method) + ": argmax " +
                               (peak ? peak->to_string() : std::string("none")));
            }
            out.push_back(std::move(series));
        }
    }
    return out;
}

AnalysisResult run_analysis(const RunConfig& config, const PipelineInputs& inputs) {
    AnalysisResult result;
    auto& log = result.log;

    for (const auto& key : config_views(config)) {
        ViewResult v;
        v.name = key.name;
        v.stream = key.stream;
        v.lexicon = key.lexicon;
        auto it = inputs.corpora.find(key.stream);
        if (it == inputs.corpora.end()) throw Error("no corpus loaded for stream '" + key.stream + "'");
        Corpus filtered = it->second;
        v.total_postings = filtered.size();
        if (key.lexicon) {
            auto lit = inputs.lexicons.find(*key.lexicon);
            if (lit == inputs.lexicons.end()) throw Error("lexicon '" + *key.lexicon + "' not loaded");
            filtered = cross_filter(filtered, lit->second).corpus;
        }
        v.retained_postings = filtered.size();
        v.buckets = bucket_by_month(filtered, config.start, config.end);
        v.months =
            prepare_documents(filtered, config.start, config.end, config.phrases, inputs.stopwords, config.periods);
        log.push_back("view " + v.name + ": " + std::to_string(v.retained_postings) + " of " +
                      std::to_string(v.total_postings) + " postings retained; " +
                      std::to_string(v.buckets.dropped_before + v.buckets.dropped_after) + " outside range");
        v.models.resize(v.months.size());
        result.views.push_back(std::move(v));
    }

    // Per-(view, month) topic models.
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t v = 0; v < result.views.size(); ++v)
        for (std::size_t m = 0; m < result.views[v].months.size(); ++m) tasks.emplace_back(v, m);
    parallel_for(tasks.size(), config.jobs, [&](std::size_t i) {
        auto& view = result.views[tasks[i].first];
        view.models[tasks[i].second] = model_month(view.months[tasks[i].second], config.lda, config.seed, view.name);
    });
    for (const auto& v : result.views)
        for (const auto& m : v.models) log.push_back(describe_model(v.name, m));

    if (config.embedding.provider == "sgns") {
        result.table = train_embedding(config, result.views);
        log.push_back("sgns: " + std::to_string(result.table->size()) + " tokens, dim " +
                      std::to_string(result.table->dim()));
    } else {
        if (!inputs.table) throw Error("embedding table provider selected but no table loaded");
        result.table = *inputs.table;
        log.push_back("table: " + std::to_string(result.table->size()) + " tokens, dim " +
                      std::to_string(result.table->dim()) + ", source " + result.table->source_label());
    }

    result.series = correlate_views(config, result.views, *result.table, &log);
    return result;
}

// ---------------------------------------------------------------------------
// Artifact formats

json to_json(const TopicSummary& summary) {
    json kws = json::array();
    for (const auto& [token, p] : summary.keywords) kws.push_back(json::array({token, p}));
    return {{"topic", summary.topic_id}, {"keywords", kws}};
}

TopicSummary topic_summary_from_json(const json& j) {
    TopicSummary s;
    s.topic_id = j.at("topic").get<int>();
    for (const auto& kw : j.at("keywords")) s.keywords.emplace_back(kw.at(0).get<std::string>(), kw.at(1).get<double>());
    return s;
}

json to_json(const LdaModel& model) {
    json phi = json::array();
    for (int k = 0; k < model.num_topics; ++k) {
        auto row = model.phi_row(k);
        phi.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return {{"num_topics", model.num_topics}, {"alpha", model.alpha},     {"beta", model.beta},
            {"vocab", model.vocab},           {"phi", phi},               {"seed", model.seed},
            {"iterations", model.iterations}, {"burn_in", model.burn_in}, {"samples", model.samples}};
}

LdaModel lda_model_from_json(const json& j) {
    LdaModel m;
    m.num_topics = j.at("num_topics").get<int>();
    m.alpha = j.at("alpha").get<double>();
    m.beta = j.at("beta").get<double>();
    m.vocab = j.at("vocab").get<std::vector<std::string>>();
    for (const auto& row : j.at("phi")) {
        auto r = row.get<std::vector<double>>();
        if (r.size() != m.vocab.size()) throw ParseError("model phi row length differs from vocabulary size");
        m.phi.insert(m.phi.end(), r.begin(), r.end());
    }
    if (m.phi.size() != static_cast<std::size_t>(m.num_topics) * m.vocab.size())
        throw ParseError("model phi has the wrong number of rows");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.iterations = j.at("iterations").get<int>();
    m.burn_in = j.value("burn_in", 0);
    m.samples = j.value("samples", std::size_t{0});
    return m;
}

void write_month_docs(const std::vector<MonthDocs>& months, std::ostream& out) {
    for (const auto& m : months)
        for (const auto& d : m.docs)
            out << json{{"posting_id", d.posting_id}, {"month", m.month.to_string()}, {"tokens", d.tokens}}.dump() << '\n';
}

std::vector<MonthDocs> read_month_docs(std::istream& in) {
    std::map<YearMonth, std::vector<TokenDoc>> by_month;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            if (!j.contains("posting_id") && j.contains("config_hash")) continue;  // provenance row
            by_month[YearMonth::parse(j.at("month").get<std::string>())].push_back(
                {j.at("posting_id").get<std::string>(), j.at("tokens").get<std::vector<std::string>>()});
        } catch (const json::exception& e) {
            throw ParseError(e.what(), lineno);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    std::vector<MonthDocs> out;
    for (auto& [month, docs] : by_month) out.push_back({month, std::move(docs), {}});
    return out;
}

json month_topics_json(const std::string& view, const MonthModel& model, int k_top) {
    json topics = json::array();
    for (const auto& t : model.topics) topics.push_back(to_json(t));
    json scores = json::array();
    if (model.selection)
        for (const auto& s : model.selection->scores)
            scores.push_back({{"k", s.num_topics}, {"mean_coherence", s.mean_coherence}, {"per_seed", s.per_seed}});
    return {{"view", view},
            {"month", model.month.to_string()},
            {"num_docs", model.num_docs},
            {"k", model.selection ? model.selection->best_k : 0},
            {"k_top", k_top},
            {"scores", scores},
            {"topics", topics}};
}

MonthModel month_model_from_json(const json& j) {
    MonthModel m;
    m.month = YearMonth::parse(j.at("month").get<std::string>());
    m.num_docs = j.value("num_docs", std::size_t{0});
    for (const auto& t : j.at("topics")) m.topics.push_back(topic_summary_from_json(t));
    return m;
}

// ---------------------------------------------------------------------------
// Full run

ArtifactWriter::ArtifactWriter(const RunConfig& config)
    : config_(config),
      root_(config.output_dir),
      hash_(config.hash()),
      provenance_{"config_hash=" + hash_, "seed=" + std::to_string(config.seed)} {}

void ArtifactWriter::text(const fs::path& relative, const std::string& content) {
    const fs::path path = root_ / relative;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
    files_.push_back(path);
}

void ArtifactWriter::series(const std::vector<CorrelationSeries>& series) {
    std::ostringstream all;
    write_series_csv(series, all, provenance_);
    text("series.csv", all.str());
    for (const auto& s : series) {
        std::ostringstream csv;
        write_series_csv({s}, csv, provenance_);
        text(fs::path("series") /
                 (sanitize_name(s.pair.a) + "_vs_" + sanitize_name(s.pair.b) + "." + to_string(s.method) + ".csv"),
             csv.str());
    }
}

void ArtifactWriter::models(const ViewResult& view) {
    const fs::path dir = sanitize_name(view.name);
    for (const auto& model : view.models) {
        const std::string month = model.month.to_string();
        json topics = month_topics_json(view.name, model, config_.lda.k_top);
        topics["config_hash"] = hash_;
        topics["seed"] = config_.seed;
        text(fs::path("topics") / dir / (month + ".json"), topics.dump(2) + "\n");
        if (model.selection) {
            json m = to_json(model.selection->model);
            m["config_hash"] = hash_;
            m["seed"] = config_.seed;
            text(fs::path("models") / dir / (month + ".json"), m.dump() + "\n");
        }
    }
}

void ArtifactWriter::phrases(const ViewResult& view) {
    const fs::path dir = sanitize_name(view.name);
    for (const auto& m : view.months)
        for (const auto& table : m.phrases.passes) {
            std::ostringstream tsv;
            tsv << "# config_hash=" << hash_ << " seed=" << config_.seed << '\n';
            write_phrase_table(table, tsv);
            text(fs::path("phrases") / dir / (m.month.to_string() + ".pass" + std::to_string(table.pass_number) + ".tsv"),
                 tsv.str());
        }
}

void ArtifactWriter::documents(const ViewResult& view) {
    std::ostringstream out;
    out << json{{"config_hash", hash_}, {"seed", config_.seed}}.dump() << '\n';
    write_month_docs(view.months, out);
    text(fs::path("docs") / (sanitize_name(view.name) + ".jsonl"), out.str());
}

void ArtifactWriter::stats(const std::vector<ViewResult>& views) {
    CorpusStats stats;
    for (const auto& v : views)
        for (const auto& b : v.buckets.buckets)
            stats.add(v.stream, v.lexicon.value_or("none"), b.month, static_cast<std::int64_t>(b.postings.size()));
    std::ostringstream csv;
    for (const auto& p : provenance_) csv << "# " << p << '\n';
    stats.write_csv(csv);
    text("stats.csv", csv.str());
}

void ArtifactWriter::embedding(const EmbeddingTable& table) {
    std::ostringstream tsv;
    tsv << "# config_hash=" << hash_ << " seed=" << config_.seed << '\n';
    write_table(table, tsv);
    text("embeddings.tsv", tsv.str());
}

void ArtifactWriter::report(const std::vector<CorrelationSeries>& series) {
    const std::string stamp = "<!-- config_hash=" + hash_ + " seed=" + std::to_string(config_.seed) + " -->\n";
    text("chart.svg", stamp + render_chart_svg(series, "Temporal topical correlation"));
    for (PairMethod method : config_.methods) {
        std::vector<CorrelationSeries> subset;
        for (const auto& s : series)
            if (s.method == method) subset.push_back(s);
        if (subset.empty()) continue;
        text(std::string("chart.") + to_string(method) + ".svg",
             stamp + render_chart_svg(subset, std::string("Temporal topical correlation (") + to_string(method) + ")"));
    }
    json summary = json::array();
    for (const auto& s : series) {
        const auto peak = s.argmax();
        summary.push_back({{"pair", s.pair.label()},
                           {"method", to_string(s.method)},
                           {"argmax", peak ? json(peak->to_string()) : json(nullptr)}});
    }
    const json run = {{"config_hash", hash_},
                      {"seed", config_.seed},
                      {"range", {config_.start.to_string(), config_.end.to_string()}},
                      {"series", summary}};
    text("run.json", run.dump(2) + "\n");
}

void ArtifactWriter::log(const std::vector<std::string>& lines, const std::string& name) {
    std::string out;
    for (const auto& p : provenance_) out += p + "\n";
    for (const auto& line : lines) out += line + "\n";
    text(name, out);
}

RunArtifacts run_pipeline(const RunConfig& config) {
    RunArtifacts art;
    art.output_dir = config.output_dir;
    const PipelineInputs inputs = load_inputs(config);
    art.analysis = run_analysis(config, inputs);
    const auto& a = art.analysis;

    ArtifactWriter w(config);
    w.series(a.series);
    for (const auto& v : a.views) {
        w.models(v);
        w.phrases(v);
    }
    w.stats(a.views);
    if (config.embedding.provider == "sgns" && a.table) w.embedding(*a.table);
    w.report(a.series);
    w.log(a.log);
    art.files = w.files();
    return art;
}

}  // namespace topicorr
