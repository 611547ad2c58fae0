#include "ikf/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace ikf {

namespace {

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
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

std::string num(double v, int precision = 2) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace

std::string render_svg(const LineChart& chart) {
    const double left = 70, right = 190, top = 40, bottom = 50;
    const double plot_w = chart.width - left - right;
    const double plot_h = chart.height - top - bottom;

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : chart.series) {
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (!std::isfinite(x_min)) x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max == y_min) y_min -= 0.5, y_max += 0.5;
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
    auto sy = [&](double y) { return top + (y_max - y) / (y_max - y_min) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << chart.width << "\" height=\"" << chart.height
        << "\" viewBox=\"0 0 " << chart.width << ' ' << chart.height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"15\">" << escape(chart.title) << "</text>\n";

    // axes
    svg << "<g stroke=\"black\" stroke-width=\"1\">\n";
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h) << "\" x2=\"" << num(left + plot_w)
        << "\" y2=\"" << num(top + plot_h) << "\"/>\n";
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
        << num(top + plot_h) << "\"/>\n";
    svg << "</g>\n";

    svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    const int x_ticks = static_cast<int>(std::min(10.0, std::floor(x_max - x_min)));
    for (int i = 0; i <= std::max(x_ticks, 1); ++i) {
        const double x = x_min + (x_max - x_min) * i / std::max(x_ticks, 1);
        svg << "<line x1=\"" << num(sx(x)) << "\" y1=\"" << num(top + plot_h) << "\" x2=\"" << num(sx(x))
            << "\" y2=\"" << num(top + plot_h + 5) << "\" stroke=\"black\"/>";
        svg << "<text x=\"" << num(sx(x)) << "\" y=\"" << num(top + plot_h + 18) << "\" text-anchor=\"middle\">"
            << tick_label(x) << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double y = y_min + (y_max - y_min) * i / 5.0;
        svg << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(sy(y)) << "\" x2=\"" << num(left + plot_w)
            << "\" y2=\"" << num(sy(y)) << "\" stroke=\"#dddddd\"/>";
        svg << "<text x=\"" << num(left - 8) << "\" y=\"" << num(sy(y) + 4) << "\" text-anchor=\"end\">"
            << tick_label(y) << "</text>\n";
    }
    svg << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(chart.height - 10.0)
        << "\" text-anchor=\"middle\">" << escape(chart.x_label) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << num(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << num(top + plot_h / 2) << ")\">" << escape(chart.y_label) << "</text>\n";
    svg << "</g>\n";

    for (const auto& s : chart.series) {
        svg << "<polyline fill=\"none\" stroke=\"" << escape(s.color) << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            svg << (first ? "" : " ") << num(sx(x)) << ',' << num(sy(y));
            first = false;
        }
        svg << "\"/>\n";
    }

    svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    double ly = top + 10;
    for (const auto& s : chart.series) {
        const double lx = left + plot_w + 15;
        svg << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 22) << "\" y2=\""
            << num(ly) << "\" stroke=\"" << escape(s.color) << "\" stroke-width=\"2\"/>";
        svg << "<text x=\"" << num(lx + 28) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.name) << "</text>\n";
        ly += 20;
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

}  // namespace ikf
