#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "topicorr/month.hpp"

namespace topicorr {

struct Posting {
    std::string id;
    std::string subreddit;
    std::int64_t created_utc = 0;
    std::string title;
    std::string body;  // "selftext" on the wire

    // title + " " + body
    std::string text() const;

    bool operator==(const Posting&) const = default;
};

// An immutable, ordered collection of postings with unique ids.
class Corpus {
public:
    Corpus() = default;
    // Throws Error on a duplicate or empty id.
    explicit Corpus(std::vector<Posting> postings);

    std::span<const Posting> postings() const noexcept { return postings_; }
    std::size_t size() const noexcept { return postings_.size(); }
    bool empty() const noexcept { return postings_.empty(); }
    const Posting& operator[](std::size_t i) const { return postings_[i]; }
    auto begin() const noexcept { return postings_.begin(); }
    auto end() const noexcept { return postings_.end(); }

    bool operator==(const Corpus&) const = default;

private:
    std::vector<Posting> postings_;
};

struct LoadReport {
    std::size_t lines = 0;
    std::size_t loaded = 0;
    std::size_t skipped_blank = 0;  // records with empty title and body
};

// Line-delimited JSON, one posting object per line:
// {"id","subreddit","created_utc","title","selftext"}. "title" and "selftext"
// may be absent (treated as empty). Throws ParseError naming the 1-based line.
Corpus load_postings(const std::filesystem::path& path, LoadReport* report = nullptr);
Corpus load_postings(std::istream& in, LoadReport* report = nullptr);

void write_postings(const Corpus& corpus, const std::filesystem::path& path);
void write_postings(const Corpus& corpus, std::ostream& out);

struct MonthBucket {
    YearMonth month;
    std::vector<Posting> postings;
};

struct BucketResult {
    std::vector<MonthBucket> buckets;  // one per month in [start, end], in order
    std::size_t dropped_before = 0;
    std::size_t dropped_after = 0;
};

// Partitions by UTC calendar month. Empty months are materialized.
BucketResult bucket_by_month(const Corpus& corpus, YearMonth start, YearMonth end);

}  // namespace topicorr
