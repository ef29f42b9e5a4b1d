#include "topicorr/phrases.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "topicorr/error.hpp"
#include "topicorr/format.hpp"

namespace topicorr {

namespace {

constexpr const char* kStopwords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours", "yourself",
    "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself",
    "they", "them", "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
    "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or", "because", "as",
    "until", "while", "of", "at", "by", "for", "with", "about", "against", "between", "into", "through",
    "during", "before", "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off",
    "over", "under", "again", "further", "then", "once", "here", "there", "when", "where", "why", "how",
    "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
    "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don", "should",
    "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "couldn", "didn", "doesn", "hadn", "hasn",
    "haven", "isn", "ma", "mightn", "mustn", "needn", "shan", "shouldn", "wasn", "weren", "won", "wouldn",
    "also", "could", "would", "might", "must", "shall", "may", "get", "got", "im", "ive", "dont", "cant",
    "its", "thats", "really", "even", "much", "many", "like", "one", "still", "yet", "every", "since",
    "though", "either", "neither", "whether", "within", "without", "via", "per", "us", "let",
};

constexpr bool is_token_char(char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
}

int word_count(const std::string& token) {
    return 1 + static_cast<int>(std::count(token.begin(), token.end(), '_'));
}

}  // namespace

const StopwordSet& default_stopwords() {
    static const StopwordSet set(std::begin(kStopwords), std::end(kStopwords));
    return set;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stopword file " + path.string());
    StopwordSet set;
    std::string line;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto last = line.find_last_not_of(" \t\r");
        std::string w = line.substr(first, last - first + 1);
        std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        set.insert(std::move(w));
    }
    return set;
}

std::vector<std::string> tokenize(std::string_view text, const StopwordSet& stopwords) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        const auto first = cur.find_first_not_of('-');
        if (first != std::string::npos) {
            const auto last = cur.find_last_not_of('-');
            std::string tok = cur.substr(first, last - first + 1);
            const bool has_letter = std::any_of(tok.begin(), tok.end(), [](char c) { return c >= 'a' && c <= 'z'; });
            if (tok.size() >= 2 && has_letter && !stopwords.contains(tok)) out.push_back(std::move(tok));
        }
        cur.clear();
    };
    for (char raw : text) {
        const char c = (raw >= 'A' && raw <= 'Z') ? static_cast<char>(raw - 'A' + 'a') : raw;
        if (is_token_char(c)) {
            cur += c;
        } else if (!cur.empty()) {
            flush();
        }
    }
    if (!cur.empty()) flush();
    return out;
}

double phrase_score(std::size_t pair_count, std::size_t count_a, std::size_t count_b, std::size_t vocab_size,
                    double delta) {
    return (static_cast<double>(pair_count) - delta) * static_cast<double>(vocab_size) /
           (static_cast<double>(count_a) * static_cast<double>(count_b));
}

PhraseTable mine_phrases(const std::vector<TokenDoc>& docs, const PhraseParams& params, int pass_number) {
    PhraseTable table;
    table.pass_number = pass_number;
    table.delta = params.delta;
    table.threshold = params.threshold;

    std::unordered_map<std::string, std::size_t> unigrams;
    std::map<std::pair<std::string, std::string>, std::size_t> pairs;
    for (const auto& doc : docs) {
        for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
            ++unigrams[doc.tokens[i]];
            if (i + 1 < doc.tokens.size() &&
                word_count(doc.tokens[i]) + word_count(doc.tokens[i + 1]) <= params.max_words)
                ++pairs[{doc.tokens[i], doc.tokens[i + 1]}];
        }
    }
    const std::size_t vocab = unigrams.size();
    for (const auto& [pair, n] : pairs) {
        const double s = phrase_score(n, unigrams[pair.first], unigrams[pair.second], vocab, params.delta);
        if (s >= params.threshold) table.entries.emplace(pair, s);
    }
    return table;
}

TokenDoc apply_phrases(const TokenDoc& doc, const PhraseTable& table) {
    TokenDoc out{doc.posting_id, {}};
    out.tokens.reserve(doc.tokens.size());
    const auto& t = doc.tokens;
    for (std::size_t i = 0; i < t.size();) {
        if (i + 1 < t.size() && table.contains(t[i], t[i + 1])) {
            out.tokens.push_back(t[i] + "_" + t[i + 1]);
            i += 2;
        } else {
            out.tokens.push_back(t[i]);
            ++i;
        }
    }
    return out;
}

TokenDoc PhraseModel::apply(const TokenDoc& doc) const {
    TokenDoc out = doc;
    for (const auto& table : passes) out = apply_phrases(out, table);
    return out;
}

PhraseModel learn_phrases(const std::vector<TokenDoc>& docs, const PhraseParams& params, int passes) {
    PhraseModel model;
    std::vector<TokenDoc> current = docs;
    for (int pass = 1; pass <= passes; ++pass) {
        PhraseTable table = mine_phrases(current, params, pass);
        for (auto& doc : current) doc = apply_phrases(doc, table);
        model.passes.push_back(std::move(table));
    }
    return model;
}

void write_phrase_table(const PhraseTable& table, std::ostream& out) {
    out << "# pass=" << table.pass_number << " delta=" << format_double(table.delta)
        << " threshold=" << format_double(table.threshold) << '\n';
    for (const auto& [pair, score] : table.entries)
        out << pair.first << '\t' << pair.second << '\t' << format_double(score) << '\n';
}

PhraseTable read_phrase_table(std::istream& in) {
    PhraseTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::istringstream header(line.substr(1));
            std::string kv;
            while (header >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
                if (key == "pass") table.pass_number = std::stoi(value);
                else if (key == "delta") table.delta = parse_double(value);
                else if (key == "threshold") table.threshold = parse_double(value);
            }
            continue;
        }
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) throw ParseError("phrase table row needs 3 fields", lineno);
        double score;
        try {
            score = parse_double(line.substr(t2 + 1));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
        table.entries.emplace(std::make_pair(line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1)), score);
    }
    return table;
}

}  // namespace topicorr
