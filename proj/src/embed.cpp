#include "topicorr/embed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "topicorr/error.hpp"
#include "topicorr/format.hpp"
#include "topicorr/rng.hpp"

namespace topicorr {

EmbeddingTable::EmbeddingTable(std::size_t dim, std::string source_label)
    : dim_(dim), source_label_(std::move(source_label)) {
    if (dim_ == 0) throw Error("embedding dimension must be positive");
}

void EmbeddingTable::add(const std::string& token, std::span<const float> vector) {
    if (vector.size() != dim_)
        throw Error("embedding for '" + token + "' has " + std::to_string(vector.size()) + " components, expected " +
                    std::to_string(dim_));
    for (float x : vector)
        if (!std::isfinite(x)) throw Error("embedding for '" + token + "' has a non-finite component");
    if (!index_.emplace(token, tokens_.size()).second) throw Error("duplicate embedding token '" + token + "'");
    tokens_.push_back(token);
    data_.insert(data_.end(), vector.begin(), vector.end());
}

std::span<const float> EmbeddingTable::lookup(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return {};
    return row(it->second);
}

EmbeddingTable load_table(std::istream& in) {
    std::size_t header_dim = 0;
    std::string label = "file";
    std::optional<EmbeddingTable> table;
    std::string line;
    std::size_t lineno = 0;
    std::vector<float> values;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::istringstream header(line.substr(1));
            std::string kv;
            while (header >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                if (kv.compare(0, eq, "dim") == 0) {
                    const double d = parse_double(kv.substr(eq + 1));
                    if (d < 1 || d != std::floor(d)) throw ParseError("invalid dim in header", lineno);
                    header_dim = static_cast<std::size_t>(d);
                } else if (kv.compare(0, eq, "source_label") == 0) {
                    label = kv.substr(eq + 1);
                }
            }
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) throw ParseError("embedding row needs a token and components", lineno);
        const std::string token = line.substr(0, tab);
        values.clear();
        std::size_t pos = tab + 1;
        for (;;) {
            const auto next = line.find('\t', pos);
            const auto field = std::string_view(line).substr(pos, next == std::string::npos ? std::string::npos : next - pos);
            try {
                values.push_back(parse_float(field));
            } catch (const ParseError&) {
                throw ParseError("non-numeric component '" + std::string(field) + "' for '" + token + "'", lineno);
            }
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        if (!table) {
            if (header_dim && header_dim != values.size())
                throw ParseError("row width " + std::to_string(values.size()) + " disagrees with header dim " +
                                     std::to_string(header_dim),
                                 lineno);
            table.emplace(values.size(), label);
        }
        if (values.size() != table->dim())
            throw ParseError("row for '" + token + "' has " + std::to_string(values.size()) + " components, expected " +
                                 std::to_string(table->dim()),
                             lineno);
        try {
            table->add(token, values);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    if (!table) {
        if (!header_dim) throw ParseError("embedding table has no rows and no dim header");
        table.emplace(header_dim, label);
    }
    return std::move(*table);
}

EmbeddingTable load_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding table " + path.string());
    return load_table(in);
}

void write_table(const EmbeddingTable& table, std::ostream& out) {
    out << "# dim=" << table.dim() << " source_label=" << table.source_label() << '\n';
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << table.tokens()[i];
        for (float x : table.row(i)) out << '\t' << format_float(x);
        out << '\n';
    }
}

void write_table(const EmbeddingTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_table(table, out);
}

namespace {

float sigmoid(float x) {
    if (x > 30.0f) return 1.0f;
    if (x < -30.0f) return 0.0f;
    return 1.0f / (1.0f + std::exp(-x));
}

}  // namespace

EmbeddingTable train_sgns(const std::vector<TokenDoc>& docs, const SgnsParams& params) {
    if (params.dim < 2) throw Error("SGNS dimension must be at least 2");
    if (params.window < 1 || params.negatives < 0 || params.epochs < 1) throw Error("invalid SGNS parameters");

    Vocabulary all;
    std::vector<std::size_t> counts;
    for (const auto& doc : docs)
        for (const auto& t : doc.tokens) {
            const auto id = static_cast<std::size_t>(all.add(t));
            if (id == counts.size()) counts.push_back(0);
            ++counts[id];
        }

    // Kept vocabulary in first-appearance order.
    std::vector<int> remap(all.size(), -1);
    std::vector<std::string> vocab;
    std::vector<double> freq;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (counts[i] >= params.min_count) {
            remap[i] = static_cast<int>(vocab.size());
            vocab.push_back(all.token(static_cast<int>(i)));
            freq.push_back(static_cast<double>(counts[i]));
        }
    }
    if (vocab.empty()) throw EmptyVocabulary("SGNS: no token reaches min_count");

    std::vector<std::vector<int>> sentences;
    std::size_t total_tokens = 0;
    for (const auto& doc : docs) {
        std::vector<int> s;
        for (const auto& t : doc.tokens) {
            const int id = remap[static_cast<std::size_t>(all.find(t))];
            if (id >= 0) s.push_back(id);
        }
        total_tokens += s.size();
        if (s.size() > 1) sentences.push_back(std::move(s));
    }

    // Negative sampling distribution: unigram^0.75.
    std::vector<double> noise_cdf(vocab.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < vocab.size(); ++i) noise_cdf[i] = acc += std::pow(freq[i], 0.75);
    for (auto& c : noise_cdf) c /= acc;

    const std::size_t dim = params.dim;
    const std::size_t V = vocab.size();
    Rng rng(params.seed);
    std::vector<float> in(V * dim);
    std::vector<float> out(V * dim, 0.0f);
    for (auto& x : in) x = static_cast<float>((rng.uniform() - 0.5) / static_cast<double>(dim));

    std::vector<float> grad(dim);
    const double total_work = static_cast<double>(params.epochs) * static_cast<double>(std::max<std::size_t>(total_tokens, 1));
    double done = 0.0;
    auto draw_negative = [&] {
        const double u = rng.uniform();
        const auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
        return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - noise_cdf.begin(), static_cast<std::ptrdiff_t>(V) - 1));
    };

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        for (const auto& s : sentences) {
            for (std::size_t pos = 0; pos < s.size(); ++pos, done += 1.0) {
                const float lr = static_cast<float>(params.learning_rate * std::max(1e-4, 1.0 - done / total_work));
                // word2vec-style dynamic window: effective radius uniform in [1, window].
                const auto radius = 1 + static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(params.window)));
                const std::size_t lo = pos >= radius ? pos - radius : 0;
                const std::size_t hi = std::min(s.size() - 1, pos + radius);
                float* center = in.data() + static_cast<std::size_t>(s[pos]) * dim;
                for (std::size_t c = lo; c <= hi; ++c) {
                    if (c == pos) continue;
                    std::fill(grad.begin(), grad.end(), 0.0f);
                    for (int n = 0; n <= params.negatives; ++n) {
                        std::size_t target;
                        float label;
                        if (n == 0) {
                            target = static_cast<std::size_t>(s[c]);
                            label = 1.0f;
                        } else {
                            target = draw_negative();
                            if (target == static_cast<std::size_t>(s[c])) continue;
                            label = 0.0f;
                        }
                        float* ctx = out.data() + target * dim;
                        float dot = 0.0f;
                        for (std::size_t j = 0; j < dim; ++j) dot += center[j] * ctx[j];
                        const float g = (label - sigmoid(dot)) * lr;
                        for (std::size_t j = 0; j < dim; ++j) {
                            grad[j] += g * ctx[j];
                            ctx[j] += g * center[j];
                        }
                    }
                    for (std::size_t j = 0; j < dim; ++j) center[j] += grad[j];
                }
            }
        }
    }

    EmbeddingTable table(dim, "sgns-native");
    for (std::size_t i = 0; i < V; ++i) table.add(vocab[i], std::span<const float>(in.data() + i * dim, dim));
    return table;
}

TopicVector topic_vector(const TopicSummary& summary, const EmbeddingTable& table, int k_top) {
    if (k_top < 1) throw Error("k_top must be at least 1");
    const std::size_t dim = table.dim();
    TopicVector tv;
    tv.topic_id = summary.topic_id;
    tv.raw.assign(static_cast<std::size_t>(k_top) * dim, 0.0);
    for (int i = 0; i < k_top; ++i) {
        if (static_cast<std::size_t>(i) >= summary.keywords.size()) {
            ++tv.missing_keywords;
            continue;
        }
        const auto vec = table.lookup(summary.keywords[static_cast<std::size_t>(i)].first);
        if (vec.empty()) {
            ++tv.missing_keywords;
            continue;
        }
        std::copy(vec.begin(), vec.end(), tv.raw.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * dim));
    }
    return tv;
}

}  // namespace topicorr
