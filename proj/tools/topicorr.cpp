// topicorr: monthly topical correlation between posting streams.
//
// Stages read and write artifacts under the output directory:
//   ingest/fetch -> corpus/<stream>.jsonl
//   filter       -> filtered/<view>.jsonl, stats.csv
//   phrases      -> docs/<view>.jsonl, phrases/<view>/<month>.passN.tsv
//   topics       -> topics/<view>/<month>.json, models/<view>/<month>.json
//   embed        -> embeddings.tsv
//   correlate    -> series.csv, series/*.csv
//   report       -> chart*.svg, run.json
// `run` performs all of them in memory.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "topicorr/archive.hpp"
#include "topicorr/corpus.hpp"
#include "topicorr/error.hpp"
#include "topicorr/lexicon.hpp"
#include "topicorr/manifest.hpp"
#include "topicorr/pipeline.hpp"
#include "topicorr/synthetic.hpp"

namespace fs = std::filesystem;
using namespace topicorr;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_data = 3;

struct Globals {
    std::string config;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
    std::string out;
};

RunConfig load(const Globals& g) {
    if (g.config.empty()) throw ConfigError("--config", "is required for this command");
    RunConfig cfg = load_config(g.config);
    if (g.seed) {
        cfg.seed = *g.seed;
        cfg.source["seed"] = *g.seed;
    }
    if (g.jobs) cfg.jobs = *g.jobs;
    if (!g.out.empty()) cfg.output_dir = g.out;
    return cfg;
}

fs::path require(const fs::path& p, const std::string& producer) {
    if (!fs::is_regular_file(p)) throw IoError(p.string() + " not found; run '" + producer + "' first");
    return p;
}

fs::path corpus_path(const RunConfig& cfg, const std::string& stream) {
    return cfg.output_dir / "corpus" / (sanitize_name(stream) + ".jsonl");
}

fs::path filtered_path(const RunConfig& cfg, const ViewKey& v) {
    return cfg.output_dir / "filtered" / (sanitize_name(v.name) + ".jsonl");
}

fs::path docs_path(const RunConfig& cfg, const ViewKey& v) {
    return cfg.output_dir / "docs" / (sanitize_name(v.name) + ".jsonl");
}

ViewResult view_from_key(const ViewKey& key) {
    ViewResult v;
    v.name = key.name;
    v.stream = key.stream;
    v.lexicon = key.lexicon;
    return v;
}

// Documents of one view for every month of the configured range.
std::vector<MonthDocs> read_view_docs(const RunConfig& cfg, const ViewKey& key) {
    std::ifstream in(require(docs_path(cfg, key), "phrases"));
    std::map<YearMonth, MonthDocs> by_month;
    for (auto& m : read_month_docs(in)) by_month.emplace(m.month, std::move(m));
    std::vector<MonthDocs> months;
    for (const auto& ym : cfg.model_months()) {
        auto it = by_month.find(ym);
        months.push_back(it == by_month.end() ? MonthDocs{ym, {}, {}} : std::move(it->second));
    }
    return months;
}

int cmd_ingest(const Globals& g) {
    const RunConfig cfg = load(g);
    std::size_t streams = 0;
    for (const auto& s : cfg.streams) {
        if (!s.path) continue;
        LoadReport report;
        const Corpus corpus = load_postings(*s.path, &report);
        fs::create_directories(corpus_path(cfg, s.name).parent_path());
        write_postings(corpus, corpus_path(cfg, s.name));
        std::cout << s.name << ": " << report.loaded << " postings (" << report.skipped_blank
                  << " blank records skipped)\n";
        ++streams;
    }
    if (streams == 0) std::cout << "no file-backed streams in the configuration\n";
    return exit_ok;
}

int cmd_fetch(const Globals& g) {
    const RunConfig cfg = load(g);
    const char* override_endpoint = std::getenv("TOPICORR_ARCHIVE_ENDPOINT");
    std::size_t streams = 0;
    for (const auto& s : cfg.streams) {
        if (!s.archive) continue;
        ArchiveQuery q = *s.archive;
        if (override_endpoint && *override_endpoint) q.endpoint = override_endpoint;
        if (q.endpoint.empty()) throw ConfigError("streams." + s.name + ".archive.endpoint", "no endpoint configured");
        FetchOptions fo;
        fo.min_request_interval = s.min_request_interval;
        FetchStats stats;
        const Corpus corpus = fetch_postings(q, fo, &stats);
        fs::create_directories(corpus_path(cfg, s.name).parent_path());
        write_postings(corpus, corpus_path(cfg, s.name));
        std::cout << s.name << ": " << corpus.size() << " postings in " << stats.requests << " requests ("
                  << stats.failed_attempts << " retried, " << stats.duplicates << " duplicates)\n";
        ++streams;
    }
    if (streams == 0) std::cout << "no archive-backed streams in the configuration\n";
    return exit_ok;
}

int cmd_filter(const Globals& g) {
    const RunConfig cfg = load(g);
    ArtifactWriter w(cfg);
    std::vector<ViewResult> views;
    for (const auto& key : config_views(cfg)) {
        ViewResult v = view_from_key(key);
        Corpus corpus = load_postings(require(corpus_path(cfg, key.stream), "ingest' or 'fetch"));
        v.total_postings = corpus.size();
        if (key.lexicon) {
            const auto it = cfg.lexicons.find(*key.lexicon);
            if (it == cfg.lexicons.end()) throw ConfigError("lexicons." + *key.lexicon, "not configured");
            corpus = cross_filter(corpus, load_lexicon(it->second, *key.lexicon)).corpus;
        }
        v.retained_postings = corpus.size();
        v.buckets = bucket_by_month(corpus, cfg.start, cfg.end);
        std::ostringstream out;
        write_postings(corpus, out);
        w.text(fs::relative(filtered_path(cfg, key), cfg.output_dir), out.str());
        std::cout << v.name << ": " << v.retained_postings << " of " << v.total_postings << " postings retained\n";
        views.push_back(std::move(v));
    }
    w.stats(views);
    return exit_ok;
}

int cmd_phrases(const Globals& g) {
    const RunConfig cfg = load(g);
    ArtifactWriter w(cfg);
    const StopwordSet stopwords = cfg.phrases.stopwords ? load_stopwords(*cfg.phrases.stopwords) : default_stopwords();
    for (const auto& key : config_views(cfg)) {
        ViewResult v = view_from_key(key);
        const Corpus corpus = load_postings(require(filtered_path(cfg, key), "filter"));
        v.months = prepare_documents(corpus, cfg.start, cfg.end, cfg.phrases, stopwords, cfg.periods);
        w.documents(v);
        w.phrases(v);
        std::size_t phrases = 0;
        for (const auto& m : v.months)
            for (const auto& t : m.phrases.passes) phrases += t.entries.size();
        std::cout << v.name << ": " << phrases << " phrases over " << v.months.size() << " months\n";
    }
    return exit_ok;
}

int cmd_topics(const Globals& g) {
    const RunConfig cfg = load(g);
    ArtifactWriter w(cfg);
    for (const auto& key : config_views(cfg)) {
        ViewResult v = view_from_key(key);
        v.months = read_view_docs(cfg, key);
        v.models.resize(v.months.size());
        // Months are independent; run up to --jobs of them at once.
        const auto workers = static_cast<std::size_t>(std::max(cfg.jobs, 1));
        for (std::size_t first = 0; first < v.months.size(); first += workers) {
            std::vector<std::thread> threads;
            std::vector<std::exception_ptr> errors(workers);
            for (std::size_t i = first; i < std::min(first + workers, v.months.size()); ++i)
                threads.emplace_back([&, i] {
                    try {
                        v.models[i] = model_month(v.months[i], cfg.lda, cfg.seed, v.name);
                    } catch (...) {
                        errors[i - first] = std::current_exception();
                    }
                });
            for (auto& t : threads) t.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        w.models(v);
        for (const auto& m : v.models)
            std::cout << v.name << " " << m.month.to_string() << ": K="
                      << (m.selection ? std::to_string(m.selection->best_k) : std::string("-")) << " over "
                      << m.num_docs << " docs\n";
    }
    return exit_ok;
}

EmbeddingTable stage_table(const RunConfig& cfg) {
    if (cfg.embedding.table_path) return load_table(*cfg.embedding.table_path);
    return load_table(require(cfg.output_dir / "embeddings.tsv", "embed"));
}

int cmd_embed(const Globals& g) {
    const RunConfig cfg = load(g);
    ArtifactWriter w(cfg);
    if (cfg.embedding.table_path) {
        const EmbeddingTable table = load_table(*cfg.embedding.table_path);
        std::cout << "table " << cfg.embedding.table_path->string() << ": " << table.size() << " tokens, dim "
                  << table.dim() << " (" << table.source_label() << ")\n";
        return exit_ok;
    }
    std::vector<ViewResult> views;
    for (const auto& key : config_views(cfg)) {
        ViewResult v = view_from_key(key);
        v.months = read_view_docs(cfg, key);
        views.push_back(std::move(v));
    }
    const EmbeddingTable table = train_embedding(cfg, views);
    w.embedding(table);
    std::cout << "sgns: " << table.size() << " tokens, dim " << table.dim() << "\n";
    return exit_ok;
}

int cmd_correlate(const Globals& g) {
    const RunConfig cfg = load(g);
    ArtifactWriter w(cfg);
    std::vector<ViewResult> views;
    for (const auto& key : config_views(cfg)) {
        ViewResult v = view_from_key(key);
        for (const auto& ym : cfg.model_months()) {
            const fs::path p = cfg.output_dir / "topics" / sanitize_name(key.name) / (ym.to_string() + ".json");
            std::ifstream in(require(p, "topics"));
            try {
                v.models.push_back(month_model_from_json(nlohmann::json::parse(in)));
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(p.string() + ": " + e.what());
            }
        }
        views.push_back(std::move(v));
    }
    std::vector<std::string> log;
    const auto series = correlate_views(cfg, views, stage_table(cfg), &log);
    w.series(series);
    w.log(log, "correlate.log");
    for (const auto& line : log) std::cout << line << "\n";
    return exit_ok;
}

int cmd_report(const Globals& g) {
    const RunConfig cfg = load(g);
    ArtifactWriter w(cfg);
    std::ifstream in(require(cfg.output_dir / "series.csv", "correlate"));
    const auto series = read_series_csv(in);
    w.report(series);
    for (const auto& s : series) {
        const auto peak = s.argmax();
        std::cout << s.pair.label() << " " << to_string(s.method) << ": argmax "
                  << (peak ? peak->to_string() : std::string("none")) << "\n";
    }
    return exit_ok;
}

int cmd_run(const Globals& g) {
    const RunConfig cfg = load(g);
    const auto art = run_pipeline(cfg);
    for (const auto& s : art.analysis.series) {
        const auto peak = s.argmax();
        std::cout << s.pair.label() << " " << to_string(s.method) << ": argmax "
                  << (peak ? peak->to_string() : std::string("none")) << "\n";
    }
    std::cout << art.files.size() << " files written to " << art.output_dir.string() << "\n";
    return exit_ok;
}

int cmd_synth(const Globals& g, const std::string& spec_path) {
    std::ifstream in(spec_path);
    if (!in) throw ConfigError("--spec", "cannot open " + spec_path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("--spec", std::string("invalid JSON: ") + e.what());
    }
    SyntheticBundle bundle = parse_synthetic_bundle(doc);
    if (g.seed) bundle.seed = *g.seed;
    const fs::path out = g.out.empty() ? fs::path(".") : fs::path(g.out);
    fs::create_directories(out);
    for (const auto& [name, corpus] : generate_bundle(bundle)) {
        const fs::path p = out / (sanitize_name(name) + ".jsonl");
        write_postings(corpus, p);
        std::cout << p.string() << ": " << corpus.size() << " postings\n";
    }
    return exit_ok;
}

int cmd_validate(const std::string& manifest_path, const std::string& stats_path) {
    const auto manifest = load_manifest(manifest_path);
    const auto stats = CorpusStats::load_csv(stats_path);
    const auto report = validate_manifest(stats, manifest);
    for (const auto& r : report.rows)
        std::cout << (r.pass ? "ok   " : "FAIL ") << r.row.subreddit << " / " << r.row.lexicon << " "
                  << r.row.period_start.to_string() << ".." << r.row.period_end.to_string() << ": expected "
                  << r.row.expected_count << ", computed " << r.computed << ", delta " << r.delta << "\n";
    std::cout << (report.pass ? "manifest matches" : "manifest mismatch") << "\n";
    return report.pass ? exit_ok : exit_data;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monthly topical correlation between posting streams"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "Run configuration (JSON)");
    app.add_option("--jobs", g.jobs, "Concurrent (view, month) tasks")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "Master seed; overrides the configuration");
    app.add_option("--out", g.out, "Output directory; overrides the configuration");

    std::string spec_path, manifest_path, stats_path;
    auto* ingest = app.add_subcommand("ingest", "Load file-backed streams into corpus/");
    auto* fetch = app.add_subcommand("fetch", "Download archive-backed streams into corpus/");
    auto* filter = app.add_subcommand("filter", "Cross-filter each stream by its lexicon");
    auto* phrases = app.add_subcommand("phrases", "Tokenize, bucket by month and merge phrases");
    auto* topics = app.add_subcommand("topics", "Coherence-selected LDA per view and month");
    auto* embed = app.add_subcommand("embed", "Train or load the embedding table");
    auto* correlate = app.add_subcommand("correlate", "Topic vectors, t-SNE and correlation series");
    auto* report = app.add_subcommand("report", "SVG charts and run summary from series.csv");
    auto* run = app.add_subcommand("run", "All stages in one process");
    auto* synth = app.add_subcommand("synth", "Generate synthetic streams from a bundle spec");
    synth->add_option("--spec", spec_path, "Synthetic bundle spec (JSON)")->required();
    auto* validate = app.add_subcommand("validate", "Compare posting counts against a dataset manifest");
    validate->add_option("--manifest", manifest_path, "Manifest CSV")->required();
    validate->add_option("--stats", stats_path, "Counts CSV (subreddit,lexicon,month,count)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    try {
        if (*ingest) return cmd_ingest(g);
        if (*fetch) return cmd_fetch(g);
        if (*filter) return cmd_filter(g);
        if (*phrases) return cmd_phrases(g);
        if (*topics) return cmd_topics(g);
        if (*embed) return cmd_embed(g);
        if (*correlate) return cmd_correlate(g);
        if (*report) return cmd_report(g);
        if (*run) return cmd_run(g);
        if (*synth) return cmd_synth(g, spec_path);
        if (*validate) {
            if (stats_path.empty()) {
                if (g.out.empty() && g.config.empty())
                    throw ConfigError("--stats", "give --stats, or --out/--config to locate stats.csv");
                stats_path = ((g.out.empty() ? load(g).output_dir : fs::path(g.out)) / "stats.csv").string();
            }
            return cmd_validate(manifest_path, stats_path);
        }
    } catch (const ConfigError& e) {
        std::cerr << "topicorr: config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "topicorr: " << e.what() << "\n";
        return exit_data;
    }
    return exit_config;
}
