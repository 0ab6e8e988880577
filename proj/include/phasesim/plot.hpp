#ifndef PHASESIM_PLOT_HPP
#define PHASESIM_PLOT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "phasesim/csv.hpp"

namespace phasesim {

struct PlotSeries {
    std::string x_column;
    std::string y_column;
    std::string label;  // defaults to the y column name when empty
};

struct PlotSpec {
    std::string title;
    std::vector<PlotSeries> series;
};

/// Fixed-canvas SVG line plot: axes with numeric ticks and one polyline per
/// series. Missing columns raise ValidationError; an empty table still yields
/// axes. Output bytes depend only on the inputs.
std::string render_plot_svg(const CsvTable& table, const PlotSpec& spec);

void emit_plot(const CsvTable& table, const PlotSpec& spec,
               const std::filesystem::path& path);

}  // namespace phasesim

#endif
