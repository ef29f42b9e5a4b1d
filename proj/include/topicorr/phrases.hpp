#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace topicorr {

using StopwordSet = std::unordered_set<std::string>;

// Built-in English stopword list.
const StopwordSet& default_stopwords();
// One word per line, '#' comments.
StopwordSet load_stopwords(const std::filesystem::path& path);

struct TokenDoc {
    std::string posting_id;
    std::vector<std::string> tokens;

    bool operator==(const TokenDoc&) const = default;
};

// Lowercases, splits on characters outside [a-z0-9-], trims edge hyphens,
// then drops stopwords, tokens shorter than 2 characters and tokens with no
// letter (pure digits such as "2020").
std::vector<std::string> tokenize(std::string_view text, const StopwordSet& stopwords = default_stopwords());

struct PhraseTable {
    int pass_number = 1;
    double delta = 5.0;
    double threshold = 10.0;
    std::map<std::pair<std::string, std::string>, double> entries;

    bool contains(const std::string& a, const std::string& b) const {
        return entries.find({a, b}) != entries.end();
    }
};

struct PhraseParams {
    double delta = 5.0;
    double threshold = 10.0;
    // Pairs whose merged token would join more than this many base words are not scored.
    int max_words = 3;
};

// Collocation score (count(a,b) - delta) * N / (count(a) * count(b)), N the
// number of distinct tokens. Adjacent pairs never span documents.
double phrase_score(std::size_t pair_count, std::size_t count_a, std::size_t count_b, std::size_t vocab_size,
                    double delta);

PhraseTable mine_phrases(const std::vector<TokenDoc>& docs, const PhraseParams& params = {}, int pass_number = 1);

// Greedy left-to-right merge of promoted pairs.
TokenDoc apply_phrases(const TokenDoc& doc, const PhraseTable& table);

// Bigram pass followed by a trigram pass over the rewritten documents.
struct PhraseModel {
    std::vector<PhraseTable> passes;

    TokenDoc apply(const TokenDoc& doc) const;
};

PhraseModel learn_phrases(const std::vector<TokenDoc>& docs, const PhraseParams& params = {}, int passes = 2);

// TSV: token_a<TAB>token_b<TAB>score, preceded by a '#' line with the pass parameters.
void write_phrase_table(const PhraseTable& table, std::ostream& out);
PhraseTable read_phrase_table(std::istream& in);

}  // namespace topicorr
