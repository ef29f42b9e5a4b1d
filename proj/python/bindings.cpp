#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "topicorr/corpus.hpp"
#include "topicorr/correlate.hpp"
#include "topicorr/embed.hpp"
#include "topicorr/error.hpp"
#include "topicorr/lexicon.hpp"
#include "topicorr/manifest.hpp"
#include "topicorr/phrases.hpp"
#include "topicorr/pipeline.hpp"
#include "topicorr/synthetic.hpp"
#include "topicorr/topicmodel.hpp"
#include "topicorr/tsne.hpp"

namespace py = pybind11;
using namespace topicorr;

namespace {

std::vector<TokenDoc> as_docs(const std::vector<std::vector<std::string>>& docs) {
    std::vector<TokenDoc> out;
    out.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) out.push_back({std::to_string(i), docs[i]});
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Monthly topical correlation between posting streams";

    auto error = py::register_exception<Error>(m, "Error");
    py::register_exception<ParseError>(m, "ParseError", error);
    py::register_exception<ConfigError>(m, "ConfigError", error);
    py::register_exception<EmptyLexicon>(m, "EmptyLexicon", error);
    py::register_exception<EmptyVocabulary>(m, "EmptyVocabulary", error);

    py::class_<Posting>(m, "Posting")
        .def(py::init([](std::string id, std::string subreddit, std::int64_t created_utc, std::string title,
                         std::string body) {
                 return Posting{std::move(id), std::move(subreddit), created_utc, std::move(title), std::move(body)};
             }),
             py::arg("id"), py::arg("subreddit"), py::arg("created_utc"), py::arg("title") = "", py::arg("body") = "")
        .def_readonly("id", &Posting::id)
        .def_readonly("subreddit", &Posting::subreddit)
        .def_readonly("created_utc", &Posting::created_utc)
        .def_readonly("title", &Posting::title)
        .def_readonly("body", &Posting::body)
        .def("text", &Posting::text)
        .def("__repr__", [](const Posting& p) { return "<Posting " + p.id + ">"; });

    m.def("load_postings", [](const std::filesystem::path& p) {
        const Corpus c = load_postings(p);
        return std::vector<Posting>(c.begin(), c.end());
    });
    m.def("write_postings", [](const std::vector<Posting>& postings, const std::filesystem::path& p) {
        write_postings(Corpus(postings), p);
    });
    m.def("month_counts",
          [](const std::vector<Posting>& postings, const std::string& start, const std::string& end) {
              std::vector<std::pair<std::string, std::size_t>> out;
              for (const auto& b : bucket_by_month(Corpus(postings), YearMonth::parse(start), YearMonth::parse(end)).buckets)
                  out.emplace_back(b.month.to_string(), b.postings.size());
              return out;
          },
          "Postings per UTC calendar month over [start, end], as (YYYY-MM, count).");

    py::class_<Lexicon>(m, "Lexicon")
        .def(py::init<std::string, const std::vector<std::string>&>(), py::arg("name"), py::arg("terms"))
        .def_property_readonly("name", &Lexicon::name)
        .def_property_readonly("terms", &Lexicon::terms)
        .def("contains_term", [](const Lexicon& l, const std::string& text) { return l.contains_term(text); })
        .def("__len__", &Lexicon::size);
    m.def("load_lexicon", [](const std::filesystem::path& p, std::string name) { return load_lexicon(p, std::move(name)); });
    m.def("cross_filter", [](const std::vector<Posting>& postings, const Lexicon& lex) {
        const auto r = cross_filter(Corpus(postings), lex);
        return std::vector<Posting>(r.corpus.begin(), r.corpus.end());
    });

    m.def("tokenize", [](const std::string& text) { return tokenize(text); });
    m.def("phrase_score", &phrase_score, py::arg("pair_count"), py::arg("count_a"), py::arg("count_b"),
          py::arg("vocab_size"), py::arg("delta") = 5.0);
    m.def("mine_phrases",
          [](const std::vector<std::vector<std::string>>& docs, double delta, double threshold) {
              PhraseParams p;
              p.delta = delta;
              p.threshold = threshold;
              return mine_phrases(as_docs(docs), p).entries;
          },
          py::arg("docs"), py::arg("delta") = 5.0, py::arg("threshold") = 10.0,
          "Bigram scores above threshold, keyed by (a, b).");
    m.def("merge_phrases",
          [](const std::vector<std::vector<std::string>>& docs, double delta, double threshold, int passes) {
              PhraseParams p;
              p.delta = delta;
              p.threshold = threshold;
              const auto in = as_docs(docs);
              const auto model = learn_phrases(in, p, passes);
              std::vector<std::vector<std::string>> out;
              for (const auto& d : in) out.push_back(model.apply(d).tokens);
              return out;
          },
          py::arg("docs"), py::arg("delta") = 5.0, py::arg("threshold") = 10.0, py::arg("passes") = 2);

    m.def("train_lda",
          [](const std::vector<std::vector<std::string>>& docs, int num_topics, double alpha, double beta,
             int iterations, int burn_in, std::uint64_t seed, int k_top) {
              LdaParams p;
              p.num_topics = num_topics;
              p.alpha = alpha;
              p.beta = beta;
              p.iterations = iterations;
              p.burn_in = burn_in;
              p.seed = seed;
              const auto model = train_lda(as_docs(docs), p);
              std::vector<std::vector<std::pair<std::string, double>>> topics;
              for (int k = 0; k < model.num_topics; ++k) topics.push_back(top_keywords(model, k, k_top).keywords);
              return topics;
          },
          py::arg("docs"), py::arg("num_topics"), py::arg("alpha"), py::arg("beta") = 0.01,
          py::arg("iterations") = 1000, py::arg("burn_in") = 500, py::arg("seed") = 0, py::arg("k_top") = 10,
          "Top keywords with probabilities per topic.");
    m.def("umass_coherence", [](const std::vector<std::string>& keywords, const std::vector<std::vector<std::string>>& docs) {
        TopicSummary s;
        for (const auto& k : keywords) s.keywords.emplace_back(k, 0.0);
        return umass_coherence(s, as_docs(docs));
    });
    m.def("select_k",
          [](const std::vector<std::vector<std::string>>& docs, const std::vector<int>& k_grid,
             const std::vector<std::uint64_t>& seeds, int iterations, int burn_in, const std::string& alpha) {
              SelectParams p;
              p.k_grid = k_grid;
              p.seeds = seeds;
              p.iterations = iterations;
              p.burn_in = burn_in;
              p.alpha = AlphaRule::parse(alpha);
              const auto r = select_k(as_docs(docs), p);
              std::map<int, double> scores;
              for (const auto& s : r.scores) scores.emplace(s.num_topics, s.mean_coherence);
              return py::make_tuple(r.best_k, scores);
          },
          py::arg("docs"), py::arg("k_grid"), py::arg("seeds"), py::arg("iterations") = 1000,
          py::arg("burn_in") = 500, py::arg("alpha") = "50/K", "(best K, mean coherence per K)");

    py::class_<EmbeddingTable>(m, "EmbeddingTable")
        .def(py::init<std::size_t, std::string>(), py::arg("dim"), py::arg("source_label") = "")
        .def("add", [](EmbeddingTable& t, const std::string& token, const std::vector<float>& v) { t.add(token, v); })
        .def_property_readonly("dim", &EmbeddingTable::dim)
        .def_property_readonly("source_label", &EmbeddingTable::source_label)
        .def_property_readonly("tokens", &EmbeddingTable::tokens)
        .def("__len__", &EmbeddingTable::size)
        .def("__contains__", &EmbeddingTable::contains)
        .def("lookup", [](const EmbeddingTable& t, const std::string& token) -> std::optional<std::vector<float>> {
            const auto v = t.lookup(token);
            if (v.empty()) return std::nullopt;
            return std::vector<float>(v.begin(), v.end());
        });
    m.def("load_table", [](const std::filesystem::path& p) { return load_table(p); });
    m.def("write_table", [](const EmbeddingTable& t, const std::filesystem::path& p) { write_table(t, p); });
    m.def("train_sgns",
          [](const std::vector<std::vector<std::string>>& docs, std::size_t dim, int epochs, std::size_t min_count,
             std::uint64_t seed) {
              SgnsParams p;
              p.dim = dim;
              p.epochs = epochs;
              p.min_count = min_count;
              p.seed = seed;
              return train_sgns(as_docs(docs), p);
          },
          py::arg("docs"), py::arg("dim") = 300, py::arg("epochs") = 5, py::arg("min_count") = 2, py::arg("seed") = 1);

    m.def("cosine", [](const std::vector<double>& u, const std::vector<double>& v) { return cosine(u, v).value; });
    m.def("pair_correlation",
          [](const VectorSet& a, const VectorSet& b, const std::string& method) {
              return pair_correlation(a, b, parse_pair_method(method));
          },
          py::arg("a"), py::arg("b"), py::arg("method") = "mean");
    m.def("tsne_reduce",
          [](const std::vector<std::vector<double>>& points, std::size_t out_dim, std::optional<double> perplexity,
             int iterations, std::uint64_t seed) {
              TsneParams p;
              p.out_dim = out_dim;
              p.perplexity = perplexity;
              p.iterations = iterations;
              p.seed = seed;
              return tsne_reduce(points, p).points;
          },
          py::arg("points"), py::arg("out_dim") = 2, py::arg("perplexity") = py::none(), py::arg("iterations") = 1000,
          py::arg("seed") = 1);

    m.def("generate_synthetic_bundle",
          [](const std::string& spec_json) {
              std::map<std::string, std::vector<Posting>> out;
              for (const auto& [name, corpus] : generate_bundle(parse_synthetic_bundle(nlohmann::json::parse(spec_json))))
                  out.emplace(name, std::vector<Posting>(corpus.begin(), corpus.end()));
              return out;
          },
          py::arg("spec_json"), "Corpora keyed by stream name from a JSON bundle spec.");

    m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("stage"), py::arg("stream"), py::arg("month"),
          py::arg("k"));
    m.def("run_pipeline",
          [](const std::filesystem::path& config, std::optional<std::filesystem::path> out, std::optional<std::uint64_t> seed) {
              RunConfig cfg = load_config(config);
              if (out) cfg.output_dir = *out;
              if (seed) {
                  cfg.seed = *seed;
                  cfg.source["seed"] = *seed;
              }
              const auto art = run_pipeline(cfg);
              std::vector<py::dict> series;
              for (const auto& s : art.analysis.series) {
                  py::dict d;
                  d["pair"] = s.pair.label();
                  d["method"] = to_string(s.method);
                  std::vector<std::pair<std::string, std::optional<double>>> points;
                  for (const auto& pt : s.points) points.emplace_back(pt.month.to_string(), pt.score);
                  d["points"] = points;
                  const auto peak = s.argmax();
                  d["argmax"] = peak ? py::cast(peak->to_string()) : py::none();
                  series.push_back(d);
              }
              return series;
          },
          py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
          "Runs every stage and writes artifacts; returns the series.");
    m.def("validate_manifest",
          [](const std::filesystem::path& manifest, const std::filesystem::path& stats) {
              const auto r = validate_manifest(CorpusStats::load_csv(stats), load_manifest(manifest));
              std::vector<py::dict> rows;
              for (const auto& row : r.rows) {
                  py::dict d;
                  d["subreddit"] = row.row.subreddit;
                  d["lexicon"] = row.row.lexicon;
                  d["expected"] = row.row.expected_count;
                  d["computed"] = row.computed;
                  d["delta"] = row.delta;
                  d["pass"] = row.pass;
                  rows.push_back(d);
              }
              return py::make_tuple(r.pass, rows);
          });
}
