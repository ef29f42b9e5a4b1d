#include "topicorr/topicmodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <exception>
#include <mutex>
#include <thread>

#include "topicorr/error.hpp"
#include "topicorr/format.hpp"

namespace topicorr {

int Vocabulary::add(const std::string& token) {
    auto [it, inserted] = ids_.emplace(token, static_cast<int>(tokens_.size()));
    if (inserted) tokens_.push_back(token);
    return it->second;
}

int Vocabulary::find(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? -1 : it->second;
}

LdaSampler::LdaSampler(std::vector<std::vector<int>> docs, int vocab_size, int num_topics, double alpha,
                       double beta, std::uint64_t seed)
    : docs_(std::move(docs)),
      v_(vocab_size),
      k_(num_topics),
      alpha_(alpha),
      beta_(beta),
      n_wk_(static_cast<std::size_t>(vocab_size) * static_cast<std::size_t>(num_topics), 0),
      n_k_(static_cast<std::size_t>(num_topics), 0),
      n_dk_(docs_.size() * static_cast<std::size_t>(num_topics), 0),
      weights_(static_cast<std::size_t>(num_topics)),
      rng_(seed) {
    z_.resize(docs_.size());
    for (std::size_t d = 0; d < docs_.size(); ++d) {
        z_[d].resize(docs_[d].size());
        for (std::size_t i = 0; i < docs_[d].size(); ++i) {
            const int k = static_cast<int>(rng_.below(static_cast<std::uint64_t>(k_)));
            const int w = docs_[d][i];
            z_[d][i] = k;
            ++n_wk_[static_cast<std::size_t>(w) * k_ + k];
            ++n_k_[static_cast<std::size_t>(k)];
            ++n_dk_[d * k_ + k];
        }
    }
}

void LdaSampler::sweep() {
    const double v_beta = static_cast<double>(v_) * beta_;
    for (std::size_t d = 0; d < docs_.size(); ++d) {
        std::int32_t* ndk = n_dk_.data() + d * k_;
        for (std::size_t i = 0; i < docs_[d].size(); ++i) {
            const int w = docs_[d][i];
            std::int32_t* nwk = n_wk_.data() + static_cast<std::size_t>(w) * k_;
            int k = z_[d][i];
            --nwk[k];
            --n_k_[static_cast<std::size_t>(k)];
            --ndk[k];

            double total = 0.0;
            for (int t = 0; t < k_; ++t) {
                total += (ndk[t] + alpha_) * (nwk[t] + beta_) / (static_cast<double>(n_k_[static_cast<std::size_t>(t)]) + v_beta);
                weights_[static_cast<std::size_t>(t)] = total;
            }
            const double u = rng_.uniform() * total;
            k = 0;
            while (k < k_ - 1 && weights_[static_cast<std::size_t>(k)] <= u) ++k;

            z_[d][i] = k;
            ++nwk[k];
            ++n_k_[static_cast<std::size_t>(k)];
            ++ndk[k];
        }
    }
}

LdaModel train_lda(const std::vector<TokenDoc>& docs, const LdaParams& params) {
    if (params.num_topics < 1) throw Error("LDA needs at least one topic");
    if (!(params.alpha > 0.0) || !(params.beta > 0.0)) throw Error("LDA smoothing parameters must be positive");
    if (params.sample_lag < 1) throw Error("sample_lag must be positive");

    LdaModel model;
    Vocabulary vocab;
    std::vector<std::vector<int>> ids;
    for (const auto& doc : docs) {
        if (doc.tokens.empty()) {
            ++model.dropped_docs;
            continue;
        }
        std::vector<int> row;
        row.reserve(doc.tokens.size());
        for (const auto& t : doc.tokens) row.push_back(vocab.add(t));
        ids.push_back(std::move(row));
        model.doc_ids.push_back(doc.posting_id);
    }
    if (vocab.size() == 0) throw EmptyVocabulary("LDA: no tokens to train on");

    const int K = params.num_topics;
    const std::size_t V = vocab.size();
    LdaSampler sampler(std::move(ids), static_cast<int>(V), K, params.alpha, params.beta, params.seed);

    std::vector<double> sum_kw(static_cast<std::size_t>(K) * V, 0.0);
    std::size_t samples = 0;
    for (int iter = 0; iter < params.iterations; ++iter) {
        sampler.sweep();
        if (iter >= params.burn_in && (iter - params.burn_in) % params.sample_lag == 0) {
            for (int k = 0; k < K; ++k)
                for (std::size_t w = 0; w < V; ++w)
                    sum_kw[static_cast<std::size_t>(k) * V + w] += sampler.topic_word(k, static_cast<int>(w));
            ++samples;
        }
    }

    model.num_topics = K;
    model.alpha = params.alpha;
    model.beta = params.beta;
    model.vocab = vocab.tokens();
    model.seed = params.seed;
    model.iterations = params.iterations;
    model.burn_in = params.burn_in;
    model.samples = samples;

    model.topic_word.resize(static_cast<std::size_t>(K) * V);
    model.topic_totals.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        model.topic_totals[static_cast<std::size_t>(k)] = sampler.topic_total(k);
        for (std::size_t w = 0; w < V; ++w)
            model.topic_word[static_cast<std::size_t>(k) * V + w] = sampler.topic_word(k, static_cast<int>(w));
    }
    const std::size_t D = sampler.docs().size();
    model.doc_topic.resize(D * static_cast<std::size_t>(K));
    for (std::size_t d = 0; d < D; ++d)
        for (int k = 0; k < K; ++k) model.doc_topic[d * K + k] = sampler.doc_topic(d, k);

    if (samples == 0) {
        for (std::size_t i = 0; i < sum_kw.size(); ++i) sum_kw[i] = model.topic_word[i];
        samples = 1;
    }
    model.phi.resize(static_cast<std::size_t>(K) * V);
    const double v_beta = static_cast<double>(V) * params.beta;
    for (int k = 0; k < K; ++k) {
        double row_total = 0.0;
        for (std::size_t w = 0; w < V; ++w) row_total += sum_kw[static_cast<std::size_t>(k) * V + w];
        const double n_k = row_total / static_cast<double>(samples);
        for (std::size_t w = 0; w < V; ++w) {
            const double n_kw = sum_kw[static_cast<std::size_t>(k) * V + w] / static_cast<double>(samples);
            model.phi[static_cast<std::size_t>(k) * V + w] = (n_kw + params.beta) / (n_k + v_beta);
        }
    }
    return model;
}

TopicSummary top_keywords(std::span<const double> weights, const std::vector<std::string>& vocab, int k_top,
                          int topic_id) {
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto n = std::min(order.size(), static_cast<std::size_t>(std::max(k_top, 0)));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (weights[a] != weights[b]) return weights[a] > weights[b];
                          return vocab[a] < vocab[b];
                      });
    TopicSummary s;
    s.topic_id = topic_id;
    for (std::size_t i = 0; i < n; ++i) s.keywords.emplace_back(vocab[order[i]], weights[order[i]]);
    return s;
}

TopicSummary top_keywords(const LdaModel& model, int topic, int k_top) {
    if (topic < 0 || topic >= model.num_topics) throw Error("topic index out of range");
    return top_keywords(model.phi_row(topic), model.vocab, k_top, topic);
}

DocFrequencyIndex::DocFrequencyIndex(const std::vector<TokenDoc>& docs) {
    for (const auto& doc : docs) add_doc(doc.tokens, 0, doc.tokens.size());
}

DocFrequencyIndex DocFrequencyIndex::from_windows(const std::vector<TokenDoc>& docs, std::size_t window) {
    DocFrequencyIndex index;
    window = std::max<std::size_t>(window, 1);
    for (const auto& doc : docs) {
        const auto n = doc.tokens.size();
        if (n == 0) continue;
        if (n <= window) {
            index.add_doc(doc.tokens, 0, n);
            continue;
        }
        for (std::size_t start = 0; start + window <= n; ++start) index.add_doc(doc.tokens, start, start + window);
    }
    return index;
}

void DocFrequencyIndex::add_doc(const std::vector<std::string>& tokens, std::size_t first, std::size_t last) {
    const auto id = static_cast<std::uint32_t>(num_docs_++);
    for (std::size_t i = first; i < last; ++i) {
        auto& list = postings_[tokens[i]];
        if (list.empty() || list.back() != id) list.push_back(id);
    }
}

std::size_t DocFrequencyIndex::df(const std::string& token) const {
    auto it = postings_.find(token);
    return it == postings_.end() ? 0 : it->second.size();
}

std::size_t DocFrequencyIndex::co_df(const std::string& a, const std::string& b) const {
    auto ia = postings_.find(a);
    auto ib = postings_.find(b);
    if (ia == postings_.end() || ib == postings_.end()) return 0;
    const auto& x = ia->second;
    const auto& y = ib->second;
    std::size_t i = 0, j = 0, n = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i] < y[j]) ++i;
        else if (y[j] < x[i]) ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

double umass_coherence(const TopicSummary& summary, const DocFrequencyIndex& index) {
    const auto& kw = summary.keywords;
    double c = 0.0;
    for (std::size_t m = 1; m < kw.size(); ++m) {
        for (std::size_t l = 0; l < m; ++l) {
            const auto d_l = index.df(kw[l].first);
            if (d_l == 0) throw Error("coherence: keyword '" + kw[l].first + "' does not occur in the corpus");
            const auto d_ml = index.co_df(kw[m].first, kw[l].first);
            c += std::log((static_cast<double>(d_ml) + 1.0) / static_cast<double>(d_l));
        }
    }
    return c;
}

double umass_coherence(const TopicSummary& summary, const std::vector<TokenDoc>& docs) {
    return umass_coherence(summary, DocFrequencyIndex(docs));
}

double npmi_coherence(const TopicSummary& summary, const DocFrequencyIndex& window_index) {
    const auto& kw = summary.keywords;
    if (kw.size() < 2 || window_index.num_docs() == 0) return 0.0;
    const double n = static_cast<double>(window_index.num_docs());
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < kw.size(); ++i) {
        for (std::size_t j = i + 1; j < kw.size(); ++j) {
            ++pairs;
            const double p_i = static_cast<double>(window_index.df(kw[i].first)) / n;
            const double p_j = static_cast<double>(window_index.df(kw[j].first)) / n;
            const double p_ij = static_cast<double>(window_index.co_df(kw[i].first, kw[j].first)) / n;
            if (p_ij <= 0.0) {
                total += -1.0;
            } else if (p_ij >= 1.0) {
                total += 1.0;
            } else {
                total += std::log(p_ij / (p_i * p_j)) / -std::log(p_ij);
            }
        }
    }
    return total / static_cast<double>(pairs);
}

AlphaRule AlphaRule::parse(const std::string& text) {
    AlphaRule rule;
    const auto slash = text.find('/');
    std::string number = text;
    if (slash != std::string::npos) {
        std::string denom = text.substr(slash + 1);
        if (denom != "K" && denom != "k") throw ParseError("alpha rule must be a number or 'x/K': " + text);
        number = text.substr(0, slash);
        rule.per_topic = true;
    } else {
        rule.per_topic = false;
    }
    rule.value = parse_double(number);
    if (!(rule.value > 0.0)) throw ParseError("alpha must be positive: " + text);
    return rule;
}

std::string AlphaRule::to_string() const { return format_double(value) + (per_topic ? "/K" : ""); }

double model_coherence(const LdaModel& model, const DocFrequencyIndex& index, CoherenceMetric metric, int k_top) {
    double total = 0.0;
    for (int k = 0; k < model.num_topics; ++k) {
        const auto summary = top_keywords(model, k, k_top);
        total += metric == CoherenceMetric::umass ? umass_coherence(summary, index) : npmi_coherence(summary, index);
    }
    return total / model.num_topics;
}

SelectResult select_k(const std::vector<TokenDoc>& docs, const SelectParams& params) {
    if (params.k_grid.empty()) throw Error("select_k: empty K grid");
    const std::size_t replicates = params.seed_fn ? std::max<std::size_t>(params.seeds.size(), 1) : params.seeds.size();
    if (replicates == 0) throw Error("select_k: no seeds");

    std::vector<int> grid = params.k_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const DocFrequencyIndex index = params.metric == CoherenceMetric::umass
                                        ? DocFrequencyIndex(docs)
                                        : DocFrequencyIndex::from_windows(docs, params.npmi_window);

    struct Task {
        int k;
        std::size_t replicate;
        LdaModel model;
        double coherence = 0.0;
    };
    std::vector<Task> tasks;
    for (int k : grid)
        for (std::size_t r = 0; r < replicates; ++r) tasks.push_back({k, r, {}, 0.0});

    auto run = [&](Task& task) {
        LdaParams p;
        p.num_topics = task.k;
        p.alpha = params.alpha(task.k);
        p.beta = params.beta;
        p.iterations = params.iterations;
        p.burn_in = params.burn_in;
        p.sample_lag = params.sample_lag;
        p.seed = params.seed_fn ? params.seed_fn(task.k, task.replicate) : params.seeds[task.replicate];
        task.model = train_lda(docs, p);
        task.coherence = model_coherence(task.model, index, params.metric, params.k_top);
    };

    const auto jobs = static_cast<std::size_t>(std::max(params.jobs, 1));
    if (jobs == 1 || tasks.size() == 1) {
        for (auto& t : tasks) run(t);
    } else {
        std::vector<std::thread> workers;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (std::size_t w = 0; w < std::min(jobs, tasks.size()); ++w) {
            workers.emplace_back([&, w] {
                for (std::size_t i = w; i < tasks.size(); i += jobs) {
                    try {
                        run(tasks[i]);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : workers) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    SelectResult result;
    double best = 0.0;
    std::size_t best_task = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        KScore score{grid[g], 0.0, {}};
        std::size_t best_rep = g * replicates;
        for (std::size_t r = 0; r < replicates; ++r) {
            const auto& t = tasks[g * replicates + r];
            score.per_seed.push_back(t.coherence);
            score.mean_coherence += t.coherence;
            if (t.coherence > tasks[best_rep].coherence) best_rep = g * replicates + r;
        }
        score.mean_coherence /= static_cast<double>(replicates);
        if (g == 0 || score.mean_coherence > best) {
            best = score.mean_coherence;
            result.best_k = grid[g];
            best_task = best_rep;
        }
        result.scores.push_back(std::move(score));
    }
    result.model = std::move(tasks[best_task].model);
    return result;
}

}  // namespace topicorr
