#include "topicorr/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include "topicorr/error.hpp"

namespace topicorr {

namespace {

constexpr bool is_word_char(char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
}

constexpr char lower(char c) noexcept { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

constexpr bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool all_space(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), is_space);
}

std::string normalize_term(std::string_view raw) {
    std::string out;
    bool pending_space = false;
    for (char c : raw) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += lower(c);
    }
    return out;
}

}  // namespace

WordSequence segment_words(std::string_view text, std::string& storage) {
    storage.assign(text.size(), '\0');
    std::transform(text.begin(), text.end(), storage.begin(), lower);
    WordSequence seq;
    const std::string_view s(storage);
    std::size_t i = 0;
    std::size_t prev_end = std::string_view::npos;
    while (i < s.size()) {
        if (!is_word_char(s[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && is_word_char(s[j])) ++j;
        if (prev_end != std::string_view::npos) seq.separators.push_back(s.substr(prev_end, i - prev_end));
        seq.words.push_back(s.substr(i, j - i));
        prev_end = j;
        i = j;
    }
    return seq;
}

Lexicon::Lexicon(std::string name, const std::vector<std::string>& terms) : name_(std::move(name)) {
    for (const auto& raw : terms) {
        std::string t = normalize_term(raw);
        if (!t.empty()) terms_.push_back(std::move(t));
    }
    std::sort(terms_.begin(), terms_.end());
    terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
    if (terms_.empty()) throw EmptyLexicon("lexicon '" + name_ + "' has no terms");

    for (const auto& term : terms_) {
        std::string storage;
        const WordSequence seq = segment_words(term, storage);
        const auto spaces = static_cast<std::size_t>(std::count(term.begin(), term.end(), ' '));
        if (spaces + 1 > 5) throw Error("lexicon '" + name_ + "': term '" + term + "' has more than 5 words");
        Pattern p;
        for (auto w : seq.words) p.words.emplace_back(w);
        for (auto sep : seq.separators) p.separators.push_back(all_space(sep) ? std::string() : std::string(sep));
        if (p.words.empty()) continue;  // e.g. a term made only of punctuation can never match
        by_first_word_[p.words.front()].push_back(patterns_.size());
        patterns_.push_back(std::move(p));
    }
}

bool Lexicon::contains_term(std::string_view text) const {
    std::string storage;
    const WordSequence seq = segment_words(text, storage);
    for (std::size_t i = 0; i < seq.words.size(); ++i) {
        auto it = by_first_word_.find(std::string(seq.words[i]));
        if (it == by_first_word_.end()) continue;
        for (std::size_t idx : it->second) {
            const Pattern& p = patterns_[idx];
            if (i + p.words.size() > seq.words.size()) continue;
            bool ok = true;
            for (std::size_t k = 1; ok && k < p.words.size(); ++k) {
                const auto sep = seq.separators[i + k - 1];
                const auto& want = p.separators[k - 1];
                ok = (want.empty() ? all_space(sep) : sep == want) && seq.words[i + k] == p.words[k];
            }
            if (ok) return true;
        }
    }
    return false;
}

Lexicon load_lexicon(std::istream& in, std::string name) {
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        terms.push_back(line);
    }
    return Lexicon(std::move(name), terms);
}

Lexicon load_lexicon(const std::filesystem::path& path, std::string name) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon " + path.string());
    return load_lexicon(in, std::move(name));
}

FilterResult cross_filter(const Corpus& corpus, const Lexicon& lexicon) {
    std::vector<Posting> kept;
    for (const auto& p : corpus)
        if (lexicon.contains_term(p.text())) kept.push_back(p);
    FilterResult r;
    r.total = corpus.size();
    r.retained = kept.size();
    r.corpus = Corpus(std::move(kept));
    return r;
}

}  // namespace topicorr
