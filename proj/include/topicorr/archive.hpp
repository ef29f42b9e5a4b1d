#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>

#include "topicorr/corpus.hpp"

namespace topicorr {

// A Pushshift-style submission archive query. The server is asked for
// postings with after < created_utc < before, sorted ascending; the client
// translates its own half-open window [after, before) onto that.
struct ArchiveQuery {
    std::string endpoint;  // e.g. "http://localhost:8080/reddit/search/submission"
    std::string subreddit;
    std::string query;
    std::int64_t after = 0;
    std::int64_t before = 0;
    int page_size = 100;
};

struct FetchOptions {
    std::chrono::milliseconds min_request_interval{1000};
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};  // doubles after each failed attempt
    std::chrono::seconds timeout{30};
};

struct FetchStats {
    std::size_t requests = 0;
    std::size_t pages = 0;
    std::size_t failed_attempts = 0;
    std::size_t duplicates = 0;
};

// Paginates on a created_utc cursor. Each page after the first re-requests
// the final second of the previous page and drops already-seen ids, so
// postings sharing a timestamp across a page boundary are not lost.
// Throws HttpError once the retry budget is exhausted, ParseError on a
// malformed body. Calls for the same (endpoint, subreddit) are serialized.
Corpus fetch_postings(const ArchiveQuery& query, const FetchOptions& options = {},
                      FetchStats* stats = nullptr);

}  // namespace topicorr
