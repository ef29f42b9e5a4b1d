#include "topicorr/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "topicorr/error.hpp"

namespace topicorr {

using nlohmann::json;

std::string Posting::text() const { return title + " " + body; }

Corpus::Corpus(std::vector<Posting> postings) : postings_(std::move(postings)) {
    std::unordered_set<std::string> seen;
    seen.reserve(postings_.size());
    for (const auto& p : postings_) {
        if (p.id.empty()) throw Error("posting with empty id");
        if (!seen.insert(p.id).second) throw Error("duplicate posting id '" + p.id + "'");
    }
}

namespace {

std::string optional_string(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string()) throw ParseError(std::string("field '") + key + "' is not a string", line);
    return it->get<std::string>();
}

}  // namespace

Corpus load_postings(std::istream& in, LoadReport* report) {
    LoadReport rep;
    std::vector<Posting> postings;
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        ++rep.lines;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), rep.lines);
        }
        if (!obj.is_object()) throw ParseError("expected a JSON object", rep.lines);

        Posting p;
        auto id = obj.find("id");
        if (id == obj.end() || !id->is_string() || id->get<std::string>().empty())
            throw ParseError("missing required field 'id'", rep.lines);
        p.id = id->get<std::string>();
        auto ts = obj.find("created_utc");
        if (ts == obj.end() || !ts->is_number())
            throw ParseError("missing required field 'created_utc'", rep.lines);
        p.created_utc = ts->is_number_float() ? static_cast<std::int64_t>(ts->get<double>())
                                              : ts->get<std::int64_t>();
        if (p.created_utc <= 0) throw ParseError("created_utc must be positive", rep.lines);
        auto sub = obj.find("subreddit");
        if (sub == obj.end() || !sub->is_string())
            throw ParseError("missing required field 'subreddit'", rep.lines);
        p.subreddit = sub->get<std::string>();
        p.title = optional_string(obj, "title", rep.lines);
        p.body = optional_string(obj, "selftext", rep.lines);

        if (!seen.insert(p.id).second) throw ParseError("duplicate id '" + p.id + "'", rep.lines);
        if (p.title.empty() && p.body.empty()) {
            ++rep.skipped_blank;
            continue;
        }
        postings.push_back(std::move(p));
    }
    rep.loaded = postings.size();
    if (report) *report = rep;
    return Corpus(std::move(postings));
}

Corpus load_postings(const std::filesystem::path& path, LoadReport* report) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return load_postings(in, report);
}

void write_postings(const Corpus& corpus, std::ostream& out) {
    for (const auto& p : corpus) {
        json obj = {{"id", p.id},
                    {"subreddit", p.subreddit},
                    {"created_utc", p.created_utc},
                    {"title", p.title},
                    {"selftext", p.body}};
        out << obj.dump() << '\n';
    }
}

void write_postings(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_postings(corpus, out);
    if (!out) throw IoError("write failed for " + path.string());
}

BucketResult bucket_by_month(const Corpus& corpus, YearMonth start, YearMonth end) {
    BucketResult result;
    for (YearMonth m : months_between(start, end)) result.buckets.push_back({m, {}});
    if (result.buckets.empty()) return result;

    const std::int64_t lo = start.first_second();
    const std::int64_t hi = end.last_second();
    for (const auto& p : corpus) {
        if (p.created_utc < lo) {
            ++result.dropped_before;
        } else if (p.created_utc > hi) {
            ++result.dropped_after;
        } else {
            const YearMonth m = YearMonth::from_epoch(p.created_utc);
            const auto index = static_cast<std::size_t>((m.year - start.year) * 12 + (m.month - start.month));
            result.buckets[index].postings.push_back(p);
        }
    }
    return result;
}

}  // namespace topicorr
