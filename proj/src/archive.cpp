#include "topicorr/archive.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "topicorr/error.hpp"

namespace topicorr {

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error("endpoint must be an absolute URL: " + url);
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

std::mutex& flight_lock(const std::string& key) {
    static std::mutex registry_mutex;
    static std::map<std::string, std::unique_ptr<std::mutex>> registry;
    std::lock_guard lock(registry_mutex);
    auto& slot = registry[key];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

Posting parse_posting(const nlohmann::json& item, const std::string& fallback_subreddit) {
    if (!item.is_object()) throw ParseError("archive response: posting is not an object");
    Posting p;
    auto id = item.find("id");
    auto ts = item.find("created_utc");
    if (id == item.end() || !id->is_string() || ts == item.end() || !ts->is_number())
        throw ParseError("archive response: posting lacks id or created_utc");
    p.id = id->get<std::string>();
    p.created_utc = ts->is_number_float() ? static_cast<std::int64_t>(ts->get<double>())
                                          : ts->get<std::int64_t>();
    auto text = [&](const char* key) {
        auto it = item.find(key);
        return it != item.end() && it->is_string() ? it->get<std::string>() : std::string();
    };
    p.subreddit = text("subreddit");
    if (p.subreddit.empty()) p.subreddit = fallback_subreddit;
    p.title = text("title");
    p.body = text("selftext");
    return p;
}

}  // namespace

Corpus fetch_postings(const ArchiveQuery& query, const FetchOptions& options, FetchStats* stats) {
    FetchStats local;
    FetchStats& st = stats ? *stats : local;
    st = {};
    if (query.page_size < 1) throw Error("page_size must be positive");
    if (query.after >= query.before) return Corpus();

    std::lock_guard flight(flight_lock(query.endpoint + "\n" + query.subreddit));

    const Endpoint ep = split_endpoint(query.endpoint);
    httplib::Client client(ep.origin);
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);

    std::vector<Posting> out;
    std::unordered_set<std::string> seen;
    std::int64_t cursor = query.after - 1;  // server bound is exclusive
    std::chrono::steady_clock::time_point last_request{};

    for (;;) {
        httplib::Params params{{"subreddit", query.subreddit},
                               {"q", query.query},
                               {"after", std::to_string(cursor)},
                               {"before", std::to_string(query.before)},
                               {"size", std::to_string(query.page_size)},
                               {"sort", "asc"}};

        httplib::Result res{nullptr, httplib::Error::Unknown};
        auto backoff = options.initial_backoff;
        for (int attempt = 1;; ++attempt) {
            if (st.requests > 0) {
                const auto wait = last_request + options.min_request_interval - std::chrono::steady_clock::now();
                if (wait > std::chrono::steady_clock::duration::zero()) std::this_thread::sleep_for(wait);
            }
            last_request = std::chrono::steady_clock::now();
            ++st.requests;
            res = client.Get(ep.path, params, httplib::Headers{});
            if (res && res->status == 200) break;
            ++st.failed_attempts;
            if (attempt >= options.max_attempts) {
                const int status = res ? res->status : 0;
                throw HttpError("archive request failed after " + std::to_string(attempt) + " attempts" +
                                    (res ? " (HTTP " + std::to_string(status) + ")"
                                         : " (" + httplib::to_string(res.error()) + ")"),
                                status);
            }
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }

        nlohmann::json body;
        try {
            body = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("archive response is not JSON: ") + e.what());
        }
        auto data = body.find("data");
        if (!body.is_object() || data == body.end() || !data->is_array())
            throw ParseError("archive response lacks a 'data' array");
        ++st.pages;

        std::size_t fresh = 0;
        std::int64_t page_max = cursor;
        for (const auto& item : *data) {
            Posting p = parse_posting(item, query.subreddit);
            page_max = std::max(page_max, p.created_utc);
            if (p.created_utc < query.after || p.created_utc >= query.before) continue;
            if (!seen.insert(p.id).second) {
                ++st.duplicates;
                continue;
            }
            ++fresh;
            out.push_back(std::move(p));
        }

        if (data->size() < static_cast<std::size_t>(query.page_size)) break;
        // A full page may end mid-second; re-request that second unless the
        // page brought nothing new, in which case move past it. More than
        // page_size postings sharing one second cannot all be retrieved.
        if (fresh == 0 && page_max <= cursor) break;
        cursor = fresh > 0 ? std::max(page_max - 1, cursor) : std::max(page_max, cursor + 1);
        if (cursor >= query.before - 1) break;
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const Posting& a, const Posting& b) { return a.created_utc < b.created_utc; });
    return Corpus(std::move(out));
}

}  // namespace topicorr
