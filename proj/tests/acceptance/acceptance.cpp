// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "topicorr/manifest.hpp"
#include "topicorr/phrases.hpp"
#include "topicorr/pipeline.hpp"
#include "topicorr/rng.hpp"
#include "topicorr/synthetic.hpp"
#include "topicorr/topicmodel.hpp"
#include "topicorr/tsne.hpp"

using namespace topicorr;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = TOPICORR_SOURCE_DIR;

// Tolerances and budgets.
constexpr double kGibbsMaxTv = 0.02;
constexpr int kGibbsSweeps = 200000;
constexpr double kGibbsSeconds = 30;
constexpr double kRecoveryMinOverlap = 0.8;
constexpr double kRecoverySeconds = 60;
constexpr int kSelectionTrials = 10;
constexpr int kSelectionMinHits = 8;
constexpr double kSelectionSeconds = 600;
constexpr double kMonotoneMinGap = 0.2;
constexpr double kEntropyTolerance = 1e-4;
constexpr double kCenterTolerance = 1e-6;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

std::vector<TokenDoc> tokenized(const Corpus& corpus) {
    std::vector<TokenDoc> docs;
    for (const auto& p : corpus) docs.push_back({p.id, tokenize(p.text())});
    return docs;
}

SyntheticSpec planted_spec(int docs, double overlap = 0.0) {
    SyntheticSpec spec;
    spec.num_topics = 3;
    spec.vocab_size = 30;
    spec.docs_per_month = docs;
    spec.doc_length = 50;
    spec.months = {YearMonth{2020, 1}};
    spec.overlap = overlap;
    return spec;
}

// ---------------------------------------------------------------------------

double log_joint(const std::vector<std::vector<int>>& docs, const std::vector<int>& z, int K, int V, double alpha,
                 double beta) {
    std::vector<std::vector<int>> ndk(docs.size(), std::vector<int>(K, 0)), nkw(K, std::vector<int>(V, 0));
    std::vector<int> nk(K, 0);
    std::size_t pos = 0;
    for (std::size_t d = 0; d < docs.size(); ++d)
        for (int w : docs[d]) {
            const int k = z[pos++];
            ++ndk[d][k];
            ++nkw[k][w];
            ++nk[k];
        }
    double lp = 0.0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        lp += std::lgamma(K * alpha) - std::lgamma(docs[d].size() + K * alpha);
        for (int k = 0; k < K; ++k) lp += std::lgamma(ndk[d][k] + alpha) - std::lgamma(alpha);
    }
    for (int k = 0; k < K; ++k) {
        lp += std::lgamma(V * beta) - std::lgamma(nk[k] + V * beta);
        for (int w = 0; w < V; ++w) lp += std::lgamma(nkw[k][w] + beta) - std::lgamma(beta);
    }
    return lp;
}

Outcome gibbs_exactness() {
    const auto t0 = Clock::now();
    const std::vector<std::vector<int>> docs{{0, 1}, {1, 2}};
    const int K = 2, V = 3;
    const double alpha = 0.5, beta = 0.5;
    std::vector<double> exact(16);
    for (int s = 0; s < 16; ++s)
        exact[s] = std::exp(log_joint(docs, {s & 1, (s >> 1) & 1, (s >> 2) & 1, (s >> 3) & 1}, K, V, alpha, beta));
    const double norm = std::accumulate(exact.begin(), exact.end(), 0.0);
    for (auto& p : exact) p /= norm;

    LdaSampler sampler(docs, V, K, alpha, beta, 2020);
    for (int i = 0; i < 1000; ++i) sampler.sweep();
    std::vector<double> freq(16, 0.0);
    for (int i = 0; i < kGibbsSweeps; ++i) {
        sampler.sweep();
        const auto& z = sampler.assignments();
        ++freq[z[0][0] | (z[0][1] << 1) | (z[1][0] << 2) | (z[1][1] << 3)];
    }
    double tv = 0.0;
    for (int s = 0; s < 16; ++s) tv += std::abs(freq[s] / kGibbsSweeps - exact[s]);
    tv /= 2.0;
    const double secs = seconds_since(t0);
    return {tv <= kGibbsMaxTv && secs < kGibbsSeconds,
            "TV " + fmt(tv) + " (max " + fmt(kGibbsMaxTv) + "), " + fmt(secs, 3) + " s"};
}

// Best one-to-one matching of learned to planted topics by top-10 overlap,
// found by trying every permutation.
double matched_overlap(const LdaModel& model, const SyntheticSpec& spec) {
    const int K = spec.num_topics;
    std::vector<std::set<std::string>> planted(K), learned(K);
    for (int t = 0; t < K; ++t) {
        const auto dist = synthetic_topic(spec, t);
        for (int r = 0; r < 10; ++r) planted[t].insert(dist[static_cast<std::size_t>(r)].first);
        for (const auto& [tok, w] : top_keywords(model, t, 10).keywords) learned[t].insert(tok);
    }
    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0.0;
    do {
        double total = 0.0;
        for (int t = 0; t < K; ++t) {
            std::vector<std::string> common;
            std::set_intersection(learned[t].begin(), learned[t].end(), planted[perm[t]].begin(),
                                  planted[perm[t]].end(), std::back_inserter(common));
            total += static_cast<double>(common.size()) / 10.0;
        }
        best = std::max(best, total / K);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

Outcome planted_recovery() {
    const auto t0 = Clock::now();
    const auto spec = planted_spec(500);
    const auto docs = tokenized(generate_synthetic(spec, 41).b);
    LdaParams p;
    p.num_topics = 3;
    p.alpha = 50.0 / 3;
    p.beta = 0.01;
    p.seed = 42;
    const auto model = train_lda(docs, p);
    const double overlap = matched_overlap(model, spec);
    const double secs = seconds_since(t0);
    return {overlap >= kRecoveryMinOverlap && secs < kRecoverySeconds,
            "overlap " + fmt(overlap) + " (min " + fmt(kRecoveryMinOverlap) + "), " + fmt(secs, 3) + " s"};
}

Outcome coherence_selection() {
    const auto t0 = Clock::now();
    int hits = 0;
    std::string picks;
    for (int trial = 0; trial < kSelectionTrials; ++trial) {
        const auto docs = tokenized(generate_synthetic(planted_spec(500), 100 + trial).b);
        SelectParams sp;
        sp.k_grid = {2, 3, 4, 5, 6};
        sp.alpha = AlphaRule{50.0, true};
        sp.beta = 0.01;
        sp.seeds = {static_cast<std::uint64_t>(500 + trial)};
        const auto r = select_k(docs, sp);
        hits += r.best_k == 3;
        picks += (picks.empty() ? "" : ",") + std::to_string(r.best_k);
    }
    const double secs = seconds_since(t0);
    return {hits >= kSelectionMinHits && secs < kSelectionSeconds,
            "K=3 in " + std::to_string(hits) + "/" + std::to_string(kSelectionTrials) + " trials (picks " + picks +
                "; min " + std::to_string(kSelectionMinHits) + "), " + fmt(secs, 3) + " s"};
}

// One month, two topics per side: four topic vectors, below the t-SNE
// minimum, so scores are computed in the raw concatenated space.
double overlap_score(double rho) {
    SyntheticSpec spec = planted_spec(200, rho);
    spec.num_topics = 2;
    spec.subreddit_a = "a";
    spec.subreddit_b = "b";
    auto pair = generate_synthetic(spec, 77);

    RunConfig cfg;
    cfg.seed = 5;
    cfg.start = cfg.end = YearMonth{2020, 1};
    cfg.streams = {StreamSource{"a", {}, {}, {}}, StreamSource{"b", {}, {}, {}}};
    cfg.pairs = {PairSpec{"a", "b", {}, {}}};
    cfg.lda.k_grid = {2};
    cfg.lda.iterations = 300;
    cfg.lda.burn_in = 150;
    cfg.embedding.sgns.dim = 50;
    cfg.methods = {PairMethod::mean};
    PipelineInputs inputs;
    inputs.corpora.emplace("a", std::move(pair.a));
    inputs.corpora.emplace("b", std::move(pair.b));
    const auto result = run_analysis(cfg, inputs);
    const auto& point = result.series.at(0).points.at(0);
    return point.score.value_or(std::numeric_limits<double>::quiet_NaN());
}

Outcome overlap_monotonicity() {
    const double s0 = overlap_score(0.0), s5 = overlap_score(0.5), s1 = overlap_score(1.0);
    const bool ok = s0 < s5 && s5 < s1 && s1 - s0 >= kMonotoneMinGap;
    return {ok, "mean scores rho=0: " + fmt(s0) + ", 0.5: " + fmt(s5) + ", 1: " + fmt(s1) + " (gap " +
                    fmt(s1 - s0) + ", min " + fmt(kMonotoneMinGap) + ")"};
}

Outcome tsne_sanity() {
    Rng rng(60);
    std::vector<std::vector<double>> pts(20, std::vector<double>(60));
    for (auto& p : pts)
        for (auto& x : p) x = rng.normal();
    TsneParams params;
    params.out_dim = 300;
    params.perplexity = 5.0;
    params.iterations = 1000;
    params.record_kl = true;
    params.seed = 61;
    const auto r = tsne_reduce(pts, params);
    double worst_entropy = 0.0;
    for (double h : r.entropies) worst_entropy = std::max(worst_entropy, std::abs(h - std::log2(5.0)));
    double worst_mean = 0.0;
    for (std::size_t d = 0; d < params.out_dim; ++d) {
        double mean = 0.0;
        for (const auto& p : r.points) mean += p[d];
        worst_mean = std::max(worst_mean, std::abs(mean / static_cast<double>(r.points.size())));
    }
    const bool have_trace = r.kl_trace.size() > 1000;
    const double kl100 = have_trace ? r.kl_trace[100] : NAN, kl1000 = have_trace ? r.kl_trace[1000] : NAN;
    const bool ok = have_trace && kl1000 <= kl100 && r.entropies.size() == 20 && worst_entropy <= kEntropyTolerance &&
                    worst_mean < kCenterTolerance;
    return {ok, "KL@100 " + fmt(kl100) + ", KL@1000 " + fmt(kl1000) + ", max entropy error " + fmt(worst_entropy, 2) +
                    ", max |mean| " + fmt(worst_mean, 2)};
}

std::map<std::string, std::string> csv_outputs(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        out[fs::relative(e.path(), root).generic_string()] = s.str();
    }
    return out;
}

struct BundledRuns {
    Outcome determinism;
    Outcome argmax;
};

BundledRuns bundled_runs() {
    const auto base = fs::temp_directory_path() / "topicorr_acceptance";
    fs::remove_all(base);
    auto cfg = load_config(kSource / "configs/synthetic_run.json");
    cfg.output_dir = base / "first";
    const auto first = run_pipeline(cfg);
    cfg.output_dir = base / "second";
    run_pipeline(cfg);

    BundledRuns out;
    const auto a = csv_outputs(base / "first"), b = csv_outputs(base / "second");
    std::size_t differing = 0;
    for (const auto& [name, bytes] : a) differing += !b.contains(name) || b.at(name) != bytes;
    differing += b.size() > a.size() ? b.size() - a.size() : 0;
    out.determinism = {!a.empty() && differing == 0,
                       std::to_string(a.size()) + " CSV files, " + std::to_string(differing) + " differ"};

    // The depression stream carries the injected overlap in September.
    const YearMonth september{2020, 9};
    bool ok = false;
    int found = 0;
    std::string detail;
    for (const auto& s : first.analysis.series) {
        const auto peak = s.argmax();
        detail += (detail.empty() ? "" : "; ") + s.pair.label() + " " + to_string(s.method) + " -> " +
                  (peak ? peak->to_string() : std::string("none"));
        if (s.pair.a == "depression") {
            ok = (found == 0 || ok) && peak == september;
            ++found;
        }
    }
    out.argmax = {ok && found == 2, detail};
    fs::remove_all(base);
    return out;
}

Outcome table1_manifest() {
    const auto manifest = load_manifest(kSource / "data/manifest/table1_manifest.csv");
    const auto good = validate_manifest(CorpusStats::load_csv(kSource / "data/manifest/table1_stats.csv"), manifest);
    const auto bad =
        validate_manifest(CorpusStats::load_csv(kSource / "data/manifest/table1_stats_perturbed.csv"), manifest);

    auto find = [](const ValidationReport& r, const std::string& sub, const std::string& lex, YearMonth start) {
        for (const auto& row : r.rows)
            if (row.row.subreddit == sub && row.row.lexicon == lex && row.row.period_start == start) return &row;
        return static_cast<const RowResult*>(nullptr);
    };
    const auto* dep = find(good, "depression", "coronavirus-glossary", {2020, 7});
    const auto* sui = find(good, "suicide", "coronavirus-glossary", {2020, 1});
    const bool cells = dep && dep->computed == 17250 && dep->pass && sui && sui->computed == 944 && sui->pass;

    std::map<std::string, std::int64_t> failed;
    for (const auto& row : bad.rows)
        if (!row.pass) failed[row.row.subreddit + "/" + row.row.lexicon + "@" + row.row.period_start.to_string()] = row.delta;
    const std::map<std::string, std::int64_t> expected{{"suicide/coronavirus-glossary@2020-01", -1},
                                                       {"depression/coronavirus-glossary@2020-07", 25},
                                                       {"Coronavirus/PHQ-9@2020-04", -7}};
    const bool ok = good.pass && good.rows.size() == 36 && cells && !bad.pass && failed == expected;
    return {ok, std::to_string(good.rows.size()) + " cells pass; perturbed fixture fails on " +
                    std::to_string(failed.size()) + " cells with the planted deltas"};
}

std::map<std::pair<std::string, std::string>, double> brute_force_scores(const std::vector<TokenDoc>& docs,
                                                                          double delta, double threshold) {
    std::vector<std::string> all;
    for (const auto& d : docs) all.insert(all.end(), d.tokens.begin(), d.tokens.end());
    const std::set<std::string> distinct(all.begin(), all.end());
    std::map<std::pair<std::string, std::string>, double> out;
    std::set<std::pair<std::string, std::string>> candidates;
    for (const auto& d : docs)
        for (std::size_t i = 0; i + 1 < d.tokens.size(); ++i) candidates.insert({d.tokens[i], d.tokens[i + 1]});
    for (const auto& [a, b] : candidates) {
        std::size_t n = 0;
        for (const auto& d : docs)
            for (std::size_t i = 0; i + 1 < d.tokens.size(); ++i) n += d.tokens[i] == a && d.tokens[i + 1] == b;
        const double ca = static_cast<double>(std::count(all.begin(), all.end(), a));
        const double cb = static_cast<double>(std::count(all.begin(), all.end(), b));
        const double score = (static_cast<double>(n) - delta) * static_cast<double>(distinct.size()) / (ca * cb);
        if (score >= threshold) out[{a, b}] = score;
    }
    return out;
}

Outcome phrase_oracle() {
    Rng rng(1000);
    const std::vector<std::pair<std::string, std::string>> collocations{
        {"social", "distancing"}, {"stay", "home"}, {"face", "mask"}, {"panic", "attack"}};
    std::vector<TokenDoc> docs;
    std::size_t n = 0;
    while (n < 1000) {
        TokenDoc d{"d" + std::to_string(docs.size()), {}};
        const std::size_t len = std::min<std::size_t>(3 + rng.below(15), 1000 - n);
        while (d.tokens.size() < len) {
            if (rng.uniform() < 0.05 && d.tokens.size() + 2 <= len) {
                const auto& c = collocations[rng.below(collocations.size())];
                d.tokens.push_back(c.first);
                d.tokens.push_back(c.second);
            } else {
                d.tokens.push_back("w" + std::to_string(rng.below(400)));
            }
        }
        n += d.tokens.size();
        docs.push_back(std::move(d));
    }
    const double lowest = std::numeric_limits<double>::lowest();
    const auto all_mined = mine_phrases(docs, {5.0, lowest, 3}).entries;
    const auto all_brute = brute_force_scores(docs, 5.0, lowest);
    const auto promoted = mine_phrases(docs, {5.0, 10.0, 3}).entries;
    const auto promoted_brute = brute_force_scores(docs, 5.0, 10.0);
    const bool ok = all_mined == all_brute && promoted == promoted_brute && !promoted.empty();
    return {ok, std::to_string(n) + " tokens, " + std::to_string(all_brute.size()) + " scored pairs, " +
                    std::to_string(promoted_brute.size()) + " promoted at threshold 10"};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](const std::string& name, const std::function<Outcome()>& fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    };

    report("gibbs-exactness", gibbs_exactness);
    report("planted-topic-recovery", planted_recovery);
    report("coherence-selection", coherence_selection);
    report("overlap-monotonicity", overlap_monotonicity);
    BundledRuns runs;
    try {
        runs = bundled_runs();
    } catch (const std::exception& e) {
        runs.determinism = runs.argmax = {false, std::string("exception: ") + e.what()};
    }
    report("temporal-argmax", [&] { return runs.argmax; });
    report("tsne-sanity", tsne_sanity);
    report("determinism", [&] { return runs.determinism; });
    report("table1-manifest", table1_manifest);
    report("phrase-oracle", phrase_oracle);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
