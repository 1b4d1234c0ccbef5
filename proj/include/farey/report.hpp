#pragma once
// Structured output helpers shared by the command-line driver and tests:
// fixed-precision number formatting, CSV assembly, a deterministic SVG line
// plot with the plotted data embedded as a comment, and a small FNV-1a digest
// used to fingerprint effective configurations.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace farey::report {

/// Format a double with 17 significant digits so that the printed value
/// round-trips exactly through strtod.
inline std::string format_sig(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// FNV-1a 64-bit digest of a string, hex-encoded.  Used to fingerprint the
/// effective option set of a run so outputs are attributable.
inline std::string fnv1a_digest(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Assemble a CSV document from a header row and string cells.
inline std::string csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    auto append_row = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    append_row(header);
    for (const auto& row : rows) append_row(row);
    return out;
}

/// One named line series for plotting.
struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    std::string title;
    std::string x_label = "x";
    std::string y_label = "y";
    bool log_y = false;
    int width = 720;
    int height = 480;
};

namespace detail {

inline std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace detail

/// Render a standalone SVG line plot.  The plotted data is embedded verbatim
/// in a comment so the figure alone suffices to reproduce the numbers.
/// Throws std::invalid_argument when no series (or an empty series) is given,
/// or when log scale is requested with non-positive values.
inline std::string render_svg(const std::vector<Series>& series, const PlotOptions& opts = {}) {
    if (series.empty()) throw std::invalid_argument("render_svg: no series given");
    for (const auto& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size())
            throw std::invalid_argument("render_svg: empty or ragged series '" + s.name + "'");
    }

    double xmin = series[0].x[0], xmax = xmin, ymin = 0.0, ymax = 0.0;
    bool first = true;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double yv = s.y[i];
            if (opts.log_y) {
                if (!(yv > 0.0))
                    throw std::invalid_argument("render_svg: log scale requires positive values");
                yv = std::log10(yv);
            }
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = yv;
                first = false;
            } else {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, yv);
                ymax = std::max(ymax, yv);
            }
        }
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;

    const double ml = 70, mr = 20, mt = 40, mb = 50;
    const double pw = opts.width - ml - mr, ph = opts.height - mt - mb;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) {
        double yv = opts.log_y ? std::log10(y) : y;
        return mt + (1.0 - (yv - ymin) / (ymax - ymin)) * ph;
    };

    static const char* kcolors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opts.width) +
           "\" height=\"" + std::to_string(opts.height) + "\" viewBox=\"0 0 " +
           std::to_string(opts.width) + " " + std::to_string(opts.height) + "\">\n";
    svg += "<!-- data\nseries,x,y\n";
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            svg += s.name + "," + format_sig(s.x[i]) + "," + format_sig(s.y[i]) + "\n";
    svg += "-->\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes.
    svg += "<line x1=\"" + detail::fmt6(ml) + "\" y1=\"" + detail::fmt6(mt) + "\" x2=\"" +
           detail::fmt6(ml) + "\" y2=\"" + detail::fmt6(mt + ph) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + detail::fmt6(ml) + "\" y1=\"" + detail::fmt6(mt + ph) + "\" x2=\"" +
           detail::fmt6(ml + pw) + "\" y2=\"" + detail::fmt6(mt + ph) + "\" stroke=\"black\"/>\n";

    // Tick labels at the extremes.
    auto text = [&](double x, double y, const std::string& t, const std::string& anchor) {
        svg += "<text x=\"" + detail::fmt6(x) + "\" y=\"" + detail::fmt6(y) +
               "\" font-size=\"12\" font-family=\"monospace\" text-anchor=\"" + anchor + "\">" +
               t + "</text>\n";
    };
    text(ml, mt + ph + 16, detail::fmt6(xmin), "middle");
    text(ml + pw, mt + ph + 16, detail::fmt6(xmax), "middle");
    std::string ylo = opts.log_y ? "1e" + detail::fmt6(ymin) : detail::fmt6(ymin);
    std::string yhi = opts.log_y ? "1e" + detail::fmt6(ymax) : detail::fmt6(ymax);
    text(ml - 6, mt + ph, ylo, "end");
    text(ml - 6, mt + 10, yhi, "end");
    if (!opts.title.empty()) text(ml + pw / 2, mt - 14, opts.title, "middle");
    text(ml + pw / 2, mt + ph + 34, opts.x_label, "middle");
    text(14, mt - 14, opts.y_label + (opts.log_y ? " (log scale)" : ""), "start");

    // Series polylines plus a legend.
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kcolors[si % 5];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i) pts += ' ';
            pts += detail::fmt6(px(s.x[i])) + "," + detail::fmt6(py(s.y[i]));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        double ly = mt + 14 + 16.0 * static_cast<double>(si);
        svg += "<line x1=\"" + detail::fmt6(ml + pw - 150) + "\" y1=\"" + detail::fmt6(ly - 4) +
               "\" x2=\"" + detail::fmt6(ml + pw - 126) + "\" y2=\"" + detail::fmt6(ly - 4) +
               "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
        text(ml + pw - 120, ly, s.name, "start");
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace farey::report
