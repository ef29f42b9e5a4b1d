#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "topicorr/corpus.hpp"
#include "topicorr/month.hpp"

namespace topicorr {

// Posting counts keyed by (subreddit, lexicon label, month).
class CorpusStats {
public:
    void add(const std::string& subreddit, const std::string& lexicon, YearMonth month,
             std::int64_t count = 1);
    // Adds one count per posting of the corpus, keyed by its subreddit.
    void add_corpus(const Corpus& corpus, const std::string& lexicon);

    bool knows(const std::string& subreddit, const std::string& lexicon) const;
    // Sum over months in [start, end].
    std::int64_t count(const std::string& subreddit, const std::string& lexicon, YearMonth start,
                       YearMonth end) const;

    // CSV with header subreddit,lexicon,month,count
    static CorpusStats load_csv(const std::filesystem::path& path);
    void write_csv(std::ostream& out) const;

private:
    std::map<std::tuple<std::string, std::string, YearMonth>, std::int64_t> counts_;
};

struct ManifestRow {
    std::string subreddit;
    std::string lexicon;
    YearMonth period_start;
    YearMonth period_end;
    std::int64_t expected_count = 0;
};

struct DatasetManifest {
    std::vector<ManifestRow> rows;
};

// CSV with header subreddit,lexicon,period_start,period_end,expected_count.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest load_manifest(std::istream& in);

struct RowResult {
    ManifestRow row;
    std::int64_t computed = 0;
    std::int64_t delta = 0;  // computed - expected
    bool pass = false;
};

struct ValidationReport {
    std::vector<RowResult> rows;
    bool pass = true;
};

// Throws Error when a row names a (subreddit, lexicon) pair absent from stats.
ValidationReport validate_manifest(const CorpusStats& stats, const DatasetManifest& manifest);

}  // namespace topicorr
