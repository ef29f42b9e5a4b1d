#include "topicorr/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "topicorr/error.hpp"

namespace topicorr {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string render_chart_svg(const std::vector<CorrelationSeries>& series, const std::string& title) {
    if (series.empty()) throw Error("render_chart: no series");
    const auto& ref = series.front().points;
    for (const auto& s : series) {
        bool same = s.points.size() == ref.size();
        for (std::size_t i = 0; same && i < ref.size(); ++i) same = s.points[i].month == ref[i].month;
        if (!same) throw Error("render_chart: series do not share a month range");
    }

    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& s : series)
        for (const auto& p : s.points)
            if (p.score) {
                lo = any ? std::min(lo, *p.score) : *p.score;
                hi = any ? std::max(hi, *p.score) : *p.score;
                any = true;
            }
    if (!any) {
        lo = -1.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-9) {
        lo -= 0.05;
        hi += 0.05;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double width = 900, height = 480;
    const double left = 70, right = 230, top = 40, bottom = 60;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    const std::size_t n = ref.size();
    auto x_of = [&](std::size_t i) { return left + (n > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n - 1) : plot_w / 2); };
    auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        svg << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
            << escape(title) << "</text>\n";

    // Axes, ticks and labels.
    svg << "<g class=\"axes\" stroke=\"black\">\n";
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h) << "\" x2=\"" << num(left + plot_w)
        << "\" y2=\"" << num(top + plot_h) << "\"/>\n";
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
        << num(top + plot_h) << "\"/>\n</g>\n";
    for (std::size_t i = 0; i < n; ++i)
        svg << "<text class=\"x-tick\" x=\"" << num(x_of(i)) << "\" y=\"" << num(top + plot_h + 18)
            << "\" text-anchor=\"middle\">" << ref[i].month.to_string() << "</text>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        svg << "<text class=\"y-tick\" x=\"" << num(left - 8) << "\" y=\"" << num(y_of(v) + 4)
            << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
    }
    svg << "<text class=\"x-label\" x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 15)
        << "\" text-anchor=\"middle\">month</text>\n";
    svg << "<text class=\"y-label\" x=\"18\" y=\"" << num(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << num(top + plot_h / 2) << ")\">score</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % std::size(kPalette)];
        const std::string label = series[s].pair.label() + " (" + to_string(series[s].method) + ")";
        std::string points;
        auto flush = [&] {
            if (points.empty()) return;
            svg << "<polyline class=\"series\" data-series=\"" << escape(label) << "\" fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
            points.clear();
        };
        for (std::size_t i = 0; i < series[s].points.size(); ++i) {
            const auto& p = series[s].points[i];
            if (!p.score) {
                flush();
                continue;
            }
            if (!points.empty()) points += ' ';
            points += num(x_of(i)) + "," + num(y_of(*p.score));
        }
        flush();

        const double ly = top + 10 + 20.0 * static_cast<double>(s);
        svg << "<g class=\"legend-entry\"><line x1=\"" << num(left + plot_w + 15) << "\" y1=\"" << num(ly) << "\" x2=\""
            << num(left + plot_w + 40) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/><text x=\"" << num(left + plot_w + 45) << "\" y=\"" << num(ly + 4) << "\">"
            << escape(label) << "</text></g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void render_chart(const std::vector<CorrelationSeries>& series, const std::filesystem::path& out_path,
                  const std::string& title) {
    const std::string svg = render_chart_svg(series, title);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + out_path.string());
    out << svg;
}

}  // namespace topicorr
