#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "topicorr/correlate.hpp"

namespace topicorr {

// Line chart with one polyline per run of consecutive present scores, so an
// absent month splits a series into segments. Throws Error on an empty list
// or on series with differing month ranges.
std::string render_chart_svg(const std::vector<CorrelationSeries>& series, const std::string& title = "");
void render_chart(const std::vector<CorrelationSeries>& series, const std::filesystem::path& out_path,
                  const std::string& title = "");

}  // namespace topicorr
