#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ikf {

struct ChartSeries {
    std::string name;
    std::string color;
    std::vector<std::pair<double, double>> points;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<ChartSeries> series;
    int width = 720;
    int height = 440;
};

/// Minimal standalone SVG: axes with ticks, one polyline per series, legend.
std::string render_svg(const LineChart& chart);

}  // namespace ikf
