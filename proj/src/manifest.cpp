#include "topicorr/manifest.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "topicorr/error.hpp"

namespace topicorr {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::int64_t parse_count(const std::string& text, std::size_t line) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || v < 0)
        throw ParseError("invalid count '" + text + "'", line);
    return v;
}

YearMonth parse_month(const std::string& text, std::size_t line) {
    try {
        return YearMonth::parse(text);
    } catch (const ParseError& e) {
        throw ParseError(e.what(), line);
    }
}

template <typename RowFn>
void read_csv(std::istream& in, const std::vector<std::string>& header, RowFn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty() || line.front() == '#') continue;
        auto fields = split_csv(line);
        if (!have_header) {
            if (fields != header) throw ParseError("unexpected CSV header", lineno);
            have_header = true;
            continue;
        }
        if (fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields", lineno);
        fn(fields, lineno);
    }
    if (!have_header) throw ParseError("missing CSV header");
}

}  // namespace

void CorpusStats::add(const std::string& subreddit, const std::string& lexicon, YearMonth month,
                      std::int64_t count) {
    counts_[{subreddit, lexicon, month}] += count;
}

void CorpusStats::add_corpus(const Corpus& corpus, const std::string& lexicon) {
    for (const auto& p : corpus) add(p.subreddit, lexicon, YearMonth::from_epoch(p.created_utc));
}

bool CorpusStats::knows(const std::string& subreddit, const std::string& lexicon) const {
    auto it = counts_.lower_bound({subreddit, lexicon, YearMonth{-999999, 1}});
    return it != counts_.end() && std::get<0>(it->first) == subreddit && std::get<1>(it->first) == lexicon;
}

std::int64_t CorpusStats::count(const std::string& subreddit, const std::string& lexicon,
                                YearMonth start, YearMonth end) const {
    std::int64_t total = 0;
    for (auto it = counts_.lower_bound({subreddit, lexicon, start});
         it != counts_.end() && std::get<0>(it->first) == subreddit && std::get<1>(it->first) == lexicon &&
         std::get<2>(it->first) <= end;
         ++it)
        total += it->second;
    return total;
}

CorpusStats CorpusStats::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    CorpusStats stats;
    read_csv(in, {"subreddit", "lexicon", "month", "count"}, [&](const auto& f, std::size_t line) {
        stats.add(f[0], f[1], parse_month(f[2], line), parse_count(f[3], line));
    });
    return stats;
}

void CorpusStats::write_csv(std::ostream& out) const {
    out << "subreddit,lexicon,month,count\n";
    for (const auto& [key, n] : counts_)
        out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key).to_string() << ','
            << n << '\n';
}

DatasetManifest load_manifest(std::istream& in) {
    DatasetManifest manifest;
    read_csv(in, {"subreddit", "lexicon", "period_start", "period_end", "expected_count"},
             [&](const auto& f, std::size_t line) {
                 ManifestRow row{f[0], f[1], parse_month(f[2], line), parse_month(f[3], line),
                                 parse_count(f[4], line)};
                 if (row.period_end < row.period_start)
                     throw ParseError("period_start after period_end", line);
                 manifest.rows.push_back(std::move(row));
             });
    return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return load_manifest(in);
}

ValidationReport validate_manifest(const CorpusStats& stats, const DatasetManifest& manifest) {
    ValidationReport report;
    for (const auto& row : manifest.rows) {
        if (!stats.knows(row.subreddit, row.lexicon))
            throw Error("manifest row references unknown subreddit/lexicon '" + row.subreddit + "' / '" +
                        row.lexicon + "'");
        RowResult r{row, stats.count(row.subreddit, row.lexicon, row.period_start, row.period_end)};
        r.delta = r.computed - row.expected_count;
        r.pass = r.delta == 0;
        report.pass = report.pass && r.pass;
        report.rows.push_back(std::move(r));
    }
    return report;
}

}  // namespace topicorr
