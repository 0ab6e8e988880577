#include "phasesim/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "phasesim/errors.hpp"

namespace phasesim {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 780.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 450.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                "#9467bd", "#ff7f0e", "#8c564b"};
constexpr size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string fmt_px(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape_xml(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
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

struct Range {
    double lo = 0.0;
    double hi = 1.0;
    bool seen = false;

    void include(double v) {
        if (!seen) {
            lo = hi = v;
            seen = true;
            return;
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finalize() {
        if (!seen) {
            lo = 0.0;
            hi = 1.0;
        } else if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

}  // namespace

std::string render_plot_svg(const CsvTable& table, const PlotSpec& spec) {
    struct SeriesPoints {
        const PlotSeries* def;
        std::vector<std::pair<double, double>> pts;
    };
    std::vector<SeriesPoints> gathered;
    gathered.reserve(spec.series.size());
    Range xr, yr;
    for (const PlotSeries& s : spec.series) {
        const size_t xi = table.column_index(s.x_column);
        const size_t yi = table.column_index(s.y_column);
        SeriesPoints sp{&s, {}};
        sp.pts.reserve(table.row_count());
        for (size_t r = 0; r < table.row_count(); ++r) {
            const double x = table.at(r, xi);
            const double y = table.at(r, yi);
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            sp.pts.emplace_back(x, y);
            xr.include(x);
            yr.include(y);
        }
        gathered.push_back(std::move(sp));
    }
    xr.finalize();
    yr.finalize();

    const auto px = [&](double x) {
        return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kRight - kLeft);
    };
    const auto py = [&](double y) {
        return kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kBottom - kTop);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
           "viewBox=\"0 0 800 500\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"#ffffff\"/>\n";
    if (!spec.title.empty()) {
        svg += "<text x=\"400\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" "
               "text-anchor=\"middle\">" +
               escape_xml(spec.title) + "</text>\n";
    }
    svg += "<rect x=\"" + fmt_px(kLeft) + "\" y=\"" + fmt_px(kTop) + "\" width=\"" +
           fmt_px(kRight - kLeft) + "\" height=\"" + fmt_px(kBottom - kTop) +
           "\" fill=\"none\" stroke=\"#333333\"/>\n";

    for (int k = 0; k <= 4; ++k) {
        const double fx = xr.lo + (xr.hi - xr.lo) * k / 4.0;
        const double x = px(fx);
        svg += "<line x1=\"" + fmt_px(x) + "\" y1=\"" + fmt_px(kBottom) + "\" x2=\"" +
               fmt_px(x) + "\" y2=\"" + fmt_px(kBottom + 6.0) +
               "\" stroke=\"#333333\"/>\n";
        svg += "<text x=\"" + fmt_px(x) + "\" y=\"" + fmt_px(kBottom + 22.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
               fmt_tick(fx) + "</text>\n";
        const double fy = yr.lo + (yr.hi - yr.lo) * k / 4.0;
        const double y = py(fy);
        svg += "<line x1=\"" + fmt_px(kLeft - 6.0) + "\" y1=\"" + fmt_px(y) + "\" x2=\"" +
               fmt_px(kLeft) + "\" y2=\"" + fmt_px(y) + "\" stroke=\"#333333\"/>\n";
        svg += "<text x=\"" + fmt_px(kLeft - 10.0) + "\" y=\"" + fmt_px(y + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
               fmt_tick(fy) + "</text>\n";
    }

    for (size_t si = 0; si < gathered.size(); ++si) {
        const SeriesPoints& sp = gathered[si];
        const char* color = kPalette[si % kPaletteSize];
        if (!sp.pts.empty()) {
            svg += "<polyline fill=\"none\" stroke=\"";
            svg += color;
            svg += "\" stroke-width=\"1.5\" points=\"";
            for (size_t i = 0; i < sp.pts.size(); ++i) {
                if (i > 0) svg += ' ';
                svg += fmt_px(px(sp.pts[i].first)) + "," + fmt_px(py(sp.pts[i].second));
            }
            svg += "\"/>\n";
        }
        const std::string label =
            sp.def->label.empty() ? sp.def->y_column : sp.def->label;
        const double ly = kTop + 18.0 + 18.0 * static_cast<double>(si);
        svg += "<line x1=\"" + fmt_px(kRight - 150.0) + "\" y1=\"" + fmt_px(ly - 4.0) +
               "\" x2=\"" + fmt_px(kRight - 120.0) + "\" y2=\"" + fmt_px(ly - 4.0) +
               "\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + fmt_px(kRight - 112.0) + "\" y=\"" + fmt_px(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape_xml(label) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void emit_plot(const CsvTable& table, const PlotSpec& spec,
               const std::filesystem::path& path) {
    write_text_file(path, render_plot_svg(table, spec));
}

}  // namespace phasesim
