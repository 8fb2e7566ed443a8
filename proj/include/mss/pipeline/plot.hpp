#pragma once

#include "mss/core/error.hpp"
#include "mss/multiscale/alignment.hpp"
#include "mss/multiscale/hierarchy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mss::pipeline {

// SVG heat maps of a scale hierarchy: one row per scale (coarsest on top), one column per
// source (e.g. oracle, predicted). Each unit is drawn across the frames it covers so rows
// line up in time; unit boundaries are marked with thin vertical lines.

struct PlotColumn {
    std::string title;
    multiscale::ScaleHierarchy hierarchy;
};

struct PlotStyle {
    double panel_width = 520.0;
    double band_height = 2.0;
    double margin_left = 70.0;
    double margin_top = 40.0;
    double gap_x = 40.0;
    double gap_y = 44.0;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

/// Perceptually ordered map (dark blue -> green -> yellow), piecewise linear.
inline std::string color(double x) {
    static constexpr std::array<std::array<double, 3>, 5> stops{{
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    x = std::clamp(x, 0.0, 1.0) * (stops.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(x), stops.size() - 2);
    const double f = x - static_cast<double>(i);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                  static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                  static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
    return buf;
}

inline std::string escape(const std::string& s) {
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

inline std::string scale_name(int level, int top) {
    if (level == 0) return "frame";
    if (level == 1) return "phoneme";
    if (level == 2) return "word";
    if (level == 3 && top == 3) return "sentence";
    return "scale " + std::to_string(level);
}

}  // namespace detail

/// Renders the figure. Rows are the union of the columns' levels; a column without a level
/// gets an empty panel. Frame counts may differ between columns.
inline std::string render_svg(const std::vector<PlotColumn>& columns, const PlotStyle& style = {}) {
    if (columns.empty()) throw InvalidInput("nothing to plot");
    std::vector<int> levels;
    for (const auto& c : columns) {
        if (c.hierarchy.levels.empty()) throw DataError("column '" + c.title + "' has no scales");
        for (const auto& s : c.hierarchy.levels) {
            if (std::find(levels.begin(), levels.end(), s.level) == levels.end()) levels.push_back(s.level);
        }
    }
    std::sort(levels.rbegin(), levels.rend());
    const Index bands = columns.front().hierarchy.levels.front().mel.cols();
    double lo = 0.0;
    double hi = 0.0;
    bool first = true;
    for (const auto& c : columns) {
        for (const auto& s : c.hierarchy.levels) {
            if (s.mel.cols() != bands) throw DataError("all scales must have the same number of bands");
            if (first) {
                lo = s.mel.minCoeff();
                hi = s.mel.maxCoeff();
                first = false;
            }
            lo = std::min(lo, s.mel.minCoeff());
            hi = std::max(hi, s.mel.maxCoeff());
        }
    }
    const double range = hi > lo ? hi - lo : 1.0;
    const double panel_h = style.band_height * static_cast<double>(bands);
    const double width = style.margin_left + columns.size() * (style.panel_width + style.gap_x);
    const double height = style.margin_top + levels.size() * (panel_h + style.gap_y);
    const int top = levels.front();

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(width) << "\" height=\""
        << detail::fmt(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t ci = 0; ci < columns.size(); ++ci) {
        const auto& col = columns[ci];
        const double x0 = style.margin_left + ci * (style.panel_width + style.gap_x);
        svg << "<text x=\"" << detail::fmt(x0 + style.panel_width / 2) << "\" y=\"16\" text-anchor=\"middle\" "
            << "font-size=\"13\">" << detail::escape(col.title) << "</text>\n";
        const double total = static_cast<double>(col.hierarchy.total_frames());
        for (std::size_t ri = 0; ri < levels.size(); ++ri) {
            const double y0 = style.margin_top + ri * (panel_h + style.gap_y);
            if (!col.hierarchy.has_level(levels[ri])) {
                svg << "<g class=\"panel empty\" data-level=\"" << levels[ri] << "\">\n";
                svg << "<rect x=\"" << detail::fmt(x0) << "\" y=\"" << detail::fmt(y0) << "\" width=\""
                    << detail::fmt(style.panel_width) << "\" height=\"" << detail::fmt(panel_h)
                    << "\" fill=\"#eeeeee\" stroke=\"black\" stroke-width=\"0.8\"/>\n";
                svg << "<text x=\"" << detail::fmt(x0 + style.panel_width / 2) << "\" y=\""
                    << detail::fmt(y0 + panel_h / 2) << "\" text-anchor=\"middle\">not predicted</text>\n</g>\n";
                continue;
            }
            const auto& s = col.hierarchy.level(levels[ri]);
            svg << "<g class=\"panel\" data-level=\"" << s.level << "\" data-units=\"" << s.alignment.size() << "\">\n";
            svg << "<text x=\"" << detail::fmt(x0) << "\" y=\"" << detail::fmt(y0 - 6) << "\">"
                << detail::scale_name(s.level, top) << " scale (l=" << s.level << ", " << s.alignment.size()
                << " units)</text>\n";
            const auto cuts = multiscale::boundaries(s.alignment);
            int start = 0;
            for (int u = 0; u < s.alignment.size(); ++u) {
                const double ux = x0 + style.panel_width * start / total;
                const double uw = style.panel_width * s.alignment[u] / total;
                for (Index m = 0; m < bands; ++m) {
                    // Low bands at the bottom.
                    const double y = y0 + panel_h - style.band_height * static_cast<double>(m + 1);
                    svg << "<rect x=\"" << detail::fmt(ux) << "\" y=\"" << detail::fmt(y) << "\" width=\""
                        << detail::fmt(uw + 0.05) << "\" height=\"" << detail::fmt(style.band_height + 0.05)
                        << "\" fill=\"" << detail::color((s.mel(u, m) - lo) / range) << "\"/>\n";
                }
                start = cuts[static_cast<std::size_t>(u)];
            }
            if (s.level > 0) {
                for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
                    const double bx = x0 + style.panel_width * cuts[k] / total;
                    svg << "<line class=\"boundary\" x1=\"" << detail::fmt(bx) << "\" y1=\"" << detail::fmt(y0)
                        << "\" x2=\"" << detail::fmt(bx) << "\" y2=\"" << detail::fmt(y0 + panel_h)
                        << "\" stroke=\"white\" stroke-width=\"0.6\"/>\n";
                }
            }
            svg << "<rect x=\"" << detail::fmt(x0) << "\" y=\"" << detail::fmt(y0) << "\" width=\""
                << detail::fmt(style.panel_width) << "\" height=\"" << detail::fmt(panel_h)
                << "\" fill=\"none\" stroke=\"black\" stroke-width=\"0.8\"/>\n";
            svg << "<text x=\"" << detail::fmt(x0 - 6) << "\" y=\"" << detail::fmt(y0 + panel_h / 2)
                << "\" text-anchor=\"end\">mel</text>\n";
            svg << "<text x=\"" << detail::fmt(x0 + style.panel_width) << "\" y=\"" << detail::fmt(y0 + panel_h + 13)
                << "\" text-anchor=\"end\">" << static_cast<int>(total) << " frames</text>\n";
            svg << "</g>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

inline void write_svg(const std::filesystem::path& path, const std::string& svg) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << svg;
}

}  // namespace mss::pipeline
