#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "topicorr/archive.hpp"
#include "topicorr/corpus.hpp"
#include "topicorr/correlate.hpp"
#include "topicorr/embed.hpp"
#include "topicorr/lexicon.hpp"
#include "topicorr/manifest.hpp"
#include "topicorr/month.hpp"
#include "topicorr/phrases.hpp"
#include "topicorr/topicmodel.hpp"
#include "topicorr/tsne.hpp"

namespace topicorr {

// child seed = splitmix64(fnv1a64(master, stage, stream, month, K))
std::uint64_t derive_seed(std::uint64_t master, const std::string& stage, const std::string& stream,
                          const std::string& month, int k);

struct StreamSource {
    std::string name;
    std::optional<std::filesystem::path> path;
    std::optional<ArchiveQuery> archive;
    std::chrono::milliseconds min_request_interval{1000};
};

struct PairSpec {
    std::string a;
    std::string b;
    std::optional<std::string> lexicon_a;
    std::optional<std::string> lexicon_b;
};

struct PhraseOptions {
    PhraseParams params;
    int passes = 2;
    std::optional<std::filesystem::path> stopwords;
};

struct LdaOptions {
    std::vector<int> k_grid{5, 10, 15, 20};
    AlphaRule alpha;
    double beta = 0.01;
    int iterations = 1000;
    int burn_in = 500;
    int sample_lag = 10;
    int replicates = 1;
    int k_top = 10;
    CoherenceMetric metric = CoherenceMetric::umass;
    std::size_t npmi_window = 10;
};

struct EmbeddingOptions {
    // "sgns" or "table:<path>"
    std::string provider = "sgns";
    SgnsParams sgns;
    std::optional<std::filesystem::path> table_path;
};

struct TsneOptions {
    bool enabled = true;
    TsneParams params;
};

// Consecutive months modeled as one unit, labeled by its first month.
struct Period {
    YearMonth start;
    YearMonth end;
};

struct RunConfig {
    std::uint64_t seed = 0;
    YearMonth start{2020, 1};
    YearMonth end{2020, 10};
    // Empty: one model per month. Otherwise contiguous periods covering the range.
    std::vector<Period> periods;
    std::vector<StreamSource> streams;
    std::map<std::string, std::filesystem::path> lexicons;
    std::vector<PairSpec> pairs;
    PhraseOptions phrases;
    LdaOptions lda;
    EmbeddingOptions embedding;
    TsneOptions tsne;
    std::vector<PairMethod> methods{PairMethod::mean, PairMethod::max_match};
    std::filesystem::path output_dir = "out";
    int jobs = 1;
    nlohmann::json source;  // as given, for provenance hashing

    // Stable hash of the configuration excluding output_dir and jobs.
    std::string hash() const;
    // Label months of the modeled units: every month, or each period's first month.
    std::vector<YearMonth> model_months() const;
};

// Parses and validates a JSON configuration. Relative paths resolve against
// `base_dir`. When `check_paths` is set, every referenced file must exist.
// Throws ConfigError naming the offending key.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir, bool check_paths = true);
RunConfig load_config(const std::filesystem::path& path);

// Tokenized, phrase-merged documents of one month (or one period, labeled by
// its first month).
struct MonthDocs {
    YearMonth month;
    std::vector<TokenDoc> docs;
    PhraseModel phrases;
};

// With `periods`, the months of each period are pooled before phrase mining.
std::vector<MonthDocs> prepare_documents(const Corpus& corpus, YearMonth start, YearMonth end,
                                         const PhraseOptions& options, const StopwordSet& stopwords,
                                         const std::vector<Period>& periods = {});

struct MonthModel {
    YearMonth month;
    std::size_t num_docs = 0;
    std::optional<SelectResult> selection;  // absent when the month has no usable documents
    std::vector<TopicSummary> topics;
};

// select_k over the month's documents with seeds derived from (master, view, month, K, replicate).
MonthModel model_month(const MonthDocs& docs, const LdaOptions& options, std::uint64_t master_seed,
                       const std::string& view, int jobs = 1);

struct PairMonthVectors {
    MonthTopics topics;
    std::size_t degenerate_a = 0;
    std::size_t degenerate_b = 0;
    bool passthrough = false;
};

// Builds topic vectors for both sides, drops all-zero vectors and, when
// enabled and at least five vectors remain, reduces them jointly with t-SNE.
PairMonthVectors embed_month(const std::vector<TopicSummary>& a, const std::vector<TopicSummary>& b,
                             const EmbeddingTable& table, int k_top, const TsneOptions& tsne, std::uint64_t seed);

struct ViewResult {
    std::string name;  // stream, or stream@lexicon
    std::string stream;
    std::optional<std::string> lexicon;
    std::size_t total_postings = 0;
    std::size_t retained_postings = 0;
    BucketResult buckets;
    std::vector<MonthDocs> months;
    std::vector<MonthModel> models;
};

struct ViewKey {
    std::string name;
    std::string stream;
    std::optional<std::string> lexicon;
};

// Distinct (stream, lexicon) views of the configured pairs in order of first use.
std::vector<ViewKey> config_views(const RunConfig& config);

// The sgns provider: one table trained on the documents of every view, each
// (stream, posting) counted once.
EmbeddingTable train_embedding(const RunConfig& config, const std::vector<ViewResult>& views);

// Topic vectors, t-SNE and one series per (pair, method). Views are matched
// by name and need `models`; months missing from a view count as empty.
std::vector<CorrelationSeries> correlate_views(const RunConfig& config, const std::vector<ViewResult>& views,
                                               const EmbeddingTable& table, std::vector<std::string>* log = nullptr);

struct AnalysisResult {
    std::vector<ViewResult> views;
    std::optional<EmbeddingTable> table;
    std::vector<CorrelationSeries> series;  // pair-major, method-minor
    std::vector<std::string> log;
};

struct PipelineInputs {
    std::map<std::string, Corpus> corpora;
    std::map<std::string, Lexicon> lexicons;
    std::optional<EmbeddingTable> table;  // required when the provider is a table
    StopwordSet stopwords = default_stopwords();
};

// The whole analysis in memory.
AnalysisResult run_analysis(const RunConfig& config, const PipelineInputs& inputs);

// Loads every input named by the config (files, archive fetches, lexicons,
// stopwords, embedding table).
PipelineInputs load_inputs(const RunConfig& config);

// Writes stage artifacts under config.output_dir, each stamped with the
// config hash and master seed.
class ArtifactWriter {
public:
    explicit ArtifactWriter(const RunConfig& config);

    const std::filesystem::path& root() const noexcept { return root_; }
    const std::vector<std::string>& provenance() const noexcept { return provenance_; }
    const std::vector<std::filesystem::path>& files() const noexcept { return files_; }

    // series.csv plus one CSV per series under series/.
    void series(const std::vector<CorrelationSeries>& series);
    // topics/<view>/<month>.json and models/<view>/<month>.json.
    void models(const ViewResult& view);
    // phrases/<view>/<month>.passN.tsv.
    void phrases(const ViewResult& view);
    // docs/<view>.jsonl.
    void documents(const ViewResult& view);
    // stats.csv with retained postings per (stream, lexicon, month).
    void stats(const std::vector<ViewResult>& views);
    void embedding(const EmbeddingTable& table);
    // chart.svg, one chart per method, run.json.
    void report(const std::vector<CorrelationSeries>& series);
    void log(const std::vector<std::string>& lines, const std::string& name = "run.log");
    void text(const std::filesystem::path& relative, const std::string& content);

private:
    const RunConfig& config_;
    std::filesystem::path root_;
    std::string hash_;
    std::vector<std::string> provenance_;
    std::vector<std::filesystem::path> files_;
};

struct RunArtifacts {
    AnalysisResult analysis;
    std::filesystem::path output_dir;
    std::vector<std::filesystem::path> files;
};

// load_inputs + run_analysis + every ArtifactWriter output except documents.
RunArtifacts run_pipeline(const RunConfig& config);

// Stage artifact formats.
nlohmann::json to_json(const TopicSummary& summary);
TopicSummary topic_summary_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LdaModel& model);
LdaModel lda_model_from_json(const nlohmann::json& j);

// JSONL rows {"posting_id","month","tokens"}.
void write_month_docs(const std::vector<MonthDocs>& months, std::ostream& out);
std::vector<MonthDocs> read_month_docs(std::istream& in);

// {"view","month","num_docs","k","scores","topics"} per month.
nlohmann::json month_topics_json(const std::string& view, const MonthModel& model, int k_top);
MonthModel month_model_from_json(const nlohmann::json& j);

std::string sanitize_name(const std::string& name);

}  // namespace topicorr
