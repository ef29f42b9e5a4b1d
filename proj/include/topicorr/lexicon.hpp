#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "topicorr/corpus.hpp"

namespace topicorr {

// Lowercased text split into words over [a-z0-9-]; separators[i] is the text
// between words[i] and words[i + 1].
struct WordSequence {
    std::vector<std::string_view> words;
    std::vector<std::string_view> separators;
};

// Lowercases `text` in place into `storage` and segments it.
WordSequence segment_words(std::string_view text, std::string& storage);

class Lexicon {
public:
    // Terms are lowercased, trimmed, whitespace-collapsed and deduplicated.
    // Throws EmptyLexicon when no term remains and Error when a term has more
    // than five words.
    Lexicon(std::string name, const std::vector<std::string>& terms);

    const std::string& name() const noexcept { return name_; }
    const std::vector<std::string>& terms() const noexcept { return terms_; }  // sorted
    std::size_t size() const noexcept { return terms_.size(); }

    // True iff some term occurs at word boundaries. Whitespace between words of
    // a term matches any nonempty whitespace run; other separators must match
    // literally ("dry  cough" matches "dry cough", "dry, cough" does not).
    bool contains_term(std::string_view text) const;

private:
    struct Pattern {
        std::vector<std::string> words;
        std::vector<std::string> separators;  // empty string means "any whitespace run"
    };

    std::string name_;
    std::vector<std::string> terms_;
    std::vector<Pattern> patterns_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_first_word_;
};

// One term per line; '#' comment lines and blank lines ignored.
Lexicon load_lexicon(const std::filesystem::path& path, std::string name);
Lexicon load_lexicon(std::istream& in, std::string name);

inline bool contains_term(std::string_view text, const Lexicon& lexicon) {
    return lexicon.contains_term(text);
}

struct FilterResult {
    Corpus corpus;
    std::size_t total = 0;
    std::size_t retained = 0;
};

// Keeps, in order, the postings whose combined text contains a lexicon term.
FilterResult cross_filter(const Corpus& corpus, const Lexicon& lexicon);

}  // namespace topicorr
