#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topicorr/month.hpp"

namespace topicorr {

struct CosineResult {
    double value = 0.0;
    bool degenerate = false;  // one of the vectors has zero norm; value is 0
};

// Throws Error on a length mismatch.
CosineResult cosine(std::span<const double> u, std::span<const double> v);

enum class PairMethod { mean, max_match };
const char* to_string(PairMethod method) noexcept;
PairMethod parse_pair_method(const std::string& text);

using VectorSet = std::vector<std::vector<double>>;

// "mean": average cosine over all |A| x |B| pairs. "max-match": the average
// of the two directed best-match means. Throws Error when a side is empty.
double pair_correlation(const VectorSet& a, const VectorSet& b, PairMethod method);

struct StreamPair {
    std::string a;
    std::string b;
    std::string label() const { return a + "/" + b; }
};

struct CorrelationPoint {
    YearMonth month;
    std::optional<double> score;
    std::string reason;  // set when score is absent
    std::size_t n_topics_a = 0;
    std::size_t n_topics_b = 0;
    PairMethod method = PairMethod::mean;
    std::string space = "raw";  // "reduced" | "raw"
};

struct CorrelationSeries {
    StreamPair pair;
    PairMethod method = PairMethod::mean;
    std::vector<CorrelationPoint> points;

    // Month with the highest present score (first on ties).
    std::optional<YearMonth> argmax() const;
};

// Topic vectors of both streams for one month, already in a common space.
struct MonthTopics {
    VectorSet a;
    VectorSet b;
    std::string space = "raw";
};

// One point per month of [start, end]; months missing from the map or with an
// empty side get an absent score with a reason.
CorrelationSeries build_series(const StreamPair& pair, const std::map<YearMonth, MonthTopics>& monthly,
                               YearMonth start, YearMonth end, PairMethod method);
// Same, over an explicit ascending list of label months.
CorrelationSeries build_series(const StreamPair& pair, const std::map<YearMonth, MonthTopics>& monthly,
                               const std::vector<YearMonth>& months, PairMethod method);

// CSV: month,pair,method,space,score,n_topics_a,n_topics_b,reason. Lines
// starting with '#' before the header carry provenance.
void write_series_csv(const std::vector<CorrelationSeries>& series, std::ostream& out,
                      const std::vector<std::string>& provenance = {});
std::vector<CorrelationSeries> read_series_csv(std::istream& in);

}  // namespace topicorr
