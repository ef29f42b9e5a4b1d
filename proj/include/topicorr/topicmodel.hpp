#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "topicorr/phrases.hpp"
#include "topicorr/rng.hpp"

namespace topicorr {

// Token <-> id, ids assigned in order of first appearance.
class Vocabulary {
public:
    int add(const std::string& token);
    int find(const std::string& token) const;  // -1 when absent
    const std::string& token(int id) const { return tokens_[static_cast<std::size_t>(id)]; }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    std::size_t size() const noexcept { return tokens_.size(); }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
};

struct LdaParams {
    int num_topics = 10;
    double alpha = 5.0;
    double beta = 0.01;
    int iterations = 1000;  // total sweeps, burn-in included
    int burn_in = 500;
    int sample_lag = 10;  // phi averages counts from every sample_lag-th post-burn-in sweep
    std::uint64_t seed = 0;
};

struct LdaModel {
    int num_topics = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<std::string> vocab;
    // Final-sweep counts. topic_word is K x V row-major, doc_topic D x K.
    std::vector<std::int32_t> topic_word;
    std::vector<std::int64_t> topic_totals;
    std::vector<std::int32_t> doc_topic;
    std::vector<std::string> doc_ids;
    // K x V; (n_kw + beta) / (n_k + V beta) over counts averaged across samples.
    std::vector<double> phi;
    std::uint64_t seed = 0;
    int iterations = 0;
    int burn_in = 0;
    std::size_t samples = 0;
    std::size_t dropped_docs = 0;

    std::size_t vocab_size() const noexcept { return vocab.size(); }
    std::span<const double> phi_row(int k) const {
        return {phi.data() + static_cast<std::size_t>(k) * vocab.size(), vocab.size()};
    }
};

// Collapsed Gibbs sampler state. Sweeps visit documents in order and tokens
// in position order.
class LdaSampler {
public:
    LdaSampler(std::vector<std::vector<int>> docs, int vocab_size, int num_topics, double alpha, double beta,
               std::uint64_t seed);

    void sweep();

    // Unnormalized full conditional for one token, counts excluding that token.
    static double conditional_weight(double n_dk, double alpha, double n_kw, double beta, double n_k,
                                     std::size_t vocab_size) noexcept {
        return (n_dk + alpha) * (n_kw + beta) / (n_k + static_cast<double>(vocab_size) * beta);
    }

    int num_topics() const noexcept { return k_; }
    int vocab_size() const noexcept { return v_; }
    const std::vector<std::vector<int>>& docs() const noexcept { return docs_; }
    const std::vector<std::vector<int>>& assignments() const noexcept { return z_; }
    std::int32_t topic_word(int k, int w) const { return n_wk_[static_cast<std::size_t>(w) * k_ + k]; }
    std::int64_t topic_total(int k) const { return n_k_[static_cast<std::size_t>(k)]; }
    std::int32_t doc_topic(std::size_t d, int k) const { return n_dk_[d * k_ + k]; }

private:
    std::vector<std::vector<int>> docs_;
    std::vector<std::vector<int>> z_;
    int v_;
    int k_;
    double alpha_;
    double beta_;
    std::vector<std::int32_t> n_wk_;  // word-major for the inner loop
    std::vector<std::int64_t> n_k_;
    std::vector<std::int32_t> n_dk_;
    std::vector<double> weights_;
    Rng rng_;
};

// Documents left empty are dropped and counted in LdaModel::dropped_docs.
// Throws EmptyVocabulary when nothing remains and Error when K < 1 or a
// smoothing parameter is not positive.
LdaModel train_lda(const std::vector<TokenDoc>& docs, const LdaParams& params);

struct TopicSummary {
    int topic_id = 0;
    std::vector<std::pair<std::string, double>> keywords;
};

// The k_top highest-weight tokens, ties broken by ascending token.
TopicSummary top_keywords(std::span<const double> weights, const std::vector<std::string>& vocab, int k_top,
                          int topic_id = 0);
TopicSummary top_keywords(const LdaModel& model, int topic, int k_top);

// Sorted posting lists of document (or window) indices per token.
class DocFrequencyIndex {
public:
    explicit DocFrequencyIndex(const std::vector<TokenDoc>& docs);
    // Every sliding window of `window` tokens is one pseudo-document; shorter
    // documents contribute a single window.
    static DocFrequencyIndex from_windows(const std::vector<TokenDoc>& docs, std::size_t window);

    std::size_t num_docs() const noexcept { return num_docs_; }
    std::size_t df(const std::string& token) const;
    std::size_t co_df(const std::string& a, const std::string& b) const;

private:
    DocFrequencyIndex() = default;
    void add_doc(const std::vector<std::string>& tokens, std::size_t first, std::size_t last);

    std::size_t num_docs_ = 0;
    std::unordered_map<std::string, std::vector<std::uint32_t>> postings_;
};

// Sum over m = 2..M, l < m of log((D(w_m, w_l) + 1) / D(w_l)). Throws Error
// when a keyword does not occur in the corpus.
double umass_coherence(const TopicSummary& summary, const DocFrequencyIndex& index);
double umass_coherence(const TopicSummary& summary, const std::vector<TokenDoc>& docs);

// Mean normalized PMI over keyword pairs, probabilities from sliding windows.
double npmi_coherence(const TopicSummary& summary, const DocFrequencyIndex& window_index);

enum class CoherenceMetric { umass, npmi };

// alpha = value / K when per_topic, else value.
struct AlphaRule {
    double value = 50.0;
    bool per_topic = true;

    double operator()(int k) const noexcept { return per_topic ? value / k : value; }
    // "50/K" or a plain number.
    static AlphaRule parse(const std::string& text);
    std::string to_string() const;
};

struct SelectParams {
    std::vector<int> k_grid{5, 10, 15, 20};
    AlphaRule alpha;
    double beta = 0.01;
    int iterations = 1000;
    int burn_in = 500;
    int sample_lag = 10;
    std::vector<std::uint64_t> seeds{1};
    // When set, the seed of replicate r at topic count K is seed_fn(K, r)
    // instead of seeds[r].
    std::function<std::uint64_t(int, std::size_t)> seed_fn;
    CoherenceMetric metric = CoherenceMetric::umass;
    int k_top = 10;
    std::size_t npmi_window = 10;
    int jobs = 1;
};

struct KScore {
    int num_topics = 0;
    double mean_coherence = 0.0;
    std::vector<double> per_seed;
};

struct SelectResult {
    int best_k = 0;
    LdaModel model;  // best replicate at best_k
    std::vector<KScore> scores;
};

// Mean topic coherence of a trained model.
double model_coherence(const LdaModel& model, const DocFrequencyIndex& index, CoherenceMetric metric, int k_top);

// Trains every (K, seed) pair and keeps the K with the highest mean coherence
// across seeds; ties go to the smaller K.
SelectResult select_k(const std::vector<TokenDoc>& docs, const SelectParams& params);

}  // namespace topicorr
