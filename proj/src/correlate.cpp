#include "topicorr/correlate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "topicorr/error.hpp"
#include "topicorr/format.hpp"

namespace topicorr {

CosineResult cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw Error("cosine: length mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) return {0.0, true};
    return {std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0), false};
}

const char* to_string(PairMethod method) noexcept { return method == PairMethod::mean ? "mean" : "max-match"; }

PairMethod parse_pair_method(const std::string& text) {
    if (text == "mean") return PairMethod::mean;
    if (text == "max-match") return PairMethod::max_match;
    throw Error("unknown correlation method '" + text + "'");
}

double pair_correlation(const VectorSet& a, const VectorSet& b, PairMethod method) {
    if (a.empty() || b.empty()) throw Error("pair_correlation: empty topic set");
    std::vector<double> sim(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) sim[i * b.size() + j] = cosine(a[i], b[j]).value;

    double score = 0.0;
    if (method == PairMethod::mean) {
        for (double s : sim) score += s;
        score /= static_cast<double>(sim.size());
    } else {
        double a_side = 0.0, b_side = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            double best = -1.0;
            for (std::size_t j = 0; j < b.size(); ++j) best = std::max(best, sim[i * b.size() + j]);
            a_side += best;
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            double best = -1.0;
            for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, sim[i * b.size() + j]);
            b_side += best;
        }
        score = 0.5 * (a_side / static_cast<double>(a.size()) + b_side / static_cast<double>(b.size()));
    }
    return std::clamp(score, -1.0, 1.0);
}

std::optional<YearMonth> CorrelationSeries::argmax() const {
    std::optional<YearMonth> best;
    double best_score = 0.0;
    for (const auto& p : points) {
        if (!p.score) continue;
        if (!best || *p.score > best_score) {
            best = p.month;
            best_score = *p.score;
        }
    }
    return best;
}

CorrelationSeries build_series(const StreamPair& pair, const std::map<YearMonth, MonthTopics>& monthly,
                               YearMonth start, YearMonth end, PairMethod method) {
    return build_series(pair, monthly, months_between(start, end), method);
}

CorrelationSeries build_series(const StreamPair& pair, const std::map<YearMonth, MonthTopics>& monthly,
                               const std::vector<YearMonth>& months, PairMethod method) {
    CorrelationSeries series{pair, method, {}};
    for (YearMonth m : months) {
        CorrelationPoint point;
        point.month = m;
        point.method = method;
        auto it = monthly.find(m);
        if (it == monthly.end()) {
            point.reason = "no topics: empty month";
        } else {
            const auto& topics = it->second;
            point.space = topics.space;
            point.n_topics_a = topics.a.size();
            point.n_topics_b = topics.b.size();
            if (topics.a.empty() && topics.b.empty()) point.reason = "no topics: empty month";
            else if (topics.a.empty()) point.reason = "no topics for " + pair.a;
            else if (topics.b.empty()) point.reason = "no topics for " + pair.b;
            else point.score = pair_correlation(topics.a, topics.b, method);
        }
        series.points.push_back(std::move(point));
    }
    return series;
}

namespace {

const char* kSeriesHeader = "month,pair,method,space,score,n_topics_a,n_topics_b,reason";

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

void write_series_csv(const std::vector<CorrelationSeries>& series, std::ostream& out,
                      const std::vector<std::string>& provenance) {
    for (const auto& line : provenance) out << "# " << line << '\n';
    out << kSeriesHeader << '\n';
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            out << p.month.to_string() << ',' << csv_field(s.pair.label()) << ',' << to_string(s.method) << ','
                << p.space << ',' << (p.score ? format_double(*p.score) : std::string()) << ',' << p.n_topics_a
                << ',' << p.n_topics_b << ',' << csv_field(p.reason) << '\n';
        }
    }
}

std::vector<CorrelationSeries> read_series_csv(std::istream& in) {
    std::vector<CorrelationSeries> out;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line != kSeriesHeader && line != std::string(kSeriesHeader) + "\r")
                throw ParseError("unexpected series CSV header", lineno);
            header = true;
            continue;
        }
        const auto f = parse_csv_line(line);
        if (f.size() != 8) throw ParseError("series row needs 8 fields", lineno);
        const auto slash = f[1].find('/');
        if (slash == std::string::npos) throw ParseError("pair must be 'a/b'", lineno);
        StreamPair pair{f[1].substr(0, slash), f[1].substr(slash + 1)};
        const PairMethod method = parse_pair_method(f[2]);
        if (out.empty() || out.back().pair.label() != pair.label() || out.back().method != method)
            out.push_back({pair, method, {}});
        CorrelationPoint p;
        try {
            p.month = YearMonth::parse(f[0]);
            if (!f[4].empty()) p.score = parse_double(f[4]);
            p.n_topics_a = static_cast<std::size_t>(std::stoull(f[5]));
            p.n_topics_b = static_cast<std::size_t>(std::stoull(f[6]));
        } catch (const std::exception& e) {
            throw ParseError(e.what(), lineno);
        }
        p.method = method;
        p.space = f[3];
        p.reason = f[7];
        out.back().points.push_back(std::move(p));
    }
    return out;
}

}  // namespace topicorr
