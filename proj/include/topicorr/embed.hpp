#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "topicorr/phrases.hpp"
#include "topicorr/topicmodel.hpp"

namespace topicorr {

// Token -> float vector map of fixed dimension.
class EmbeddingTable {
public:
    EmbeddingTable(std::size_t dim, std::string source_label);

    // Throws Error on a wrong length, a non-finite component or a duplicate token.
    void add(const std::string& token, std::span<const float> vector);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return tokens_.size(); }
    const std::string& source_label() const noexcept { return source_label_; }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    bool contains(const std::string& token) const { return index_.contains(token); }
    // Empty span when the token is absent.
    std::span<const float> lookup(const std::string& token) const;
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

private:
    std::size_t dim_;
    std::string source_label_;
    std::vector<std::string> tokens_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

// token<TAB>c1<TAB>...<TAB>cdim per row; a leading "# dim=N source_label=S"
// header is optional on input and always written on output.
EmbeddingTable load_table(const std::filesystem::path& path);
EmbeddingTable load_table(std::istream& in);
void write_table(const EmbeddingTable& table, const std::filesystem::path& path);
void write_table(const EmbeddingTable& table, std::ostream& out);

struct SgnsParams {
    std::size_t dim = 300;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double learning_rate = 0.025;
    std::size_t min_count = 2;
    std::uint64_t seed = 1;
};

// Skip-gram with negative sampling; returns the input (center) vectors.
// Throws EmptyVocabulary when no token reaches min_count.
EmbeddingTable train_sgns(const std::vector<TokenDoc>& docs, const SgnsParams& params);

struct TopicVector {
    int topic_id = 0;
    std::vector<double> raw;  // k_top * dim
    std::optional<std::vector<double>> reduced;
    std::size_t missing_keywords = 0;  // OOV plus padded blocks
};

// Concatenates keyword vectors in rank order; OOV keywords and missing ranks
// become zero blocks.
TopicVector topic_vector(const TopicSummary& summary, const EmbeddingTable& table, int k_top);

}  // namespace topicorr
