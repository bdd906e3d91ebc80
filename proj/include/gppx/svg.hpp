#pragma once

// Self-contained SVG figures. Output depends only on the inputs: coordinates
// are printed with fixed precision and no timestamps or ids are emitted.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gppx::svg {

struct LineSeries {
    std::string name;
    std::vector<double> y;  // plotted against index 0..n-1 unless x is set
    std::vector<double> x;
    std::string color = "#1f77b4";
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<LineSeries> series;
    bool log_y = false;  // non-positive values are dropped when set
    int width = 720;
    int height = 360;
};

std::string render_line_chart(const LineChart& chart);

/// Cells with no value are drawn grey. The colour scale runs from white at
/// `min` to `color_high` at `max`; both default to the data range.
struct HeatMap {
    std::string title;
    std::string legend_label;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::optional<double>> values;  // row-major, row 0 drawn at the top
    std::string color_high = "#b2182b";
    std::optional<double> min;
    std::optional<double> max;
    int cell_size = 16;
};

std::string render_heat_map(const HeatMap& map);

/// Distinct, stable colour for the i-th region.
std::string region_color(std::size_t index);

/// Escapes &, <, >, " for element text and attribute values.
std::string escape(const std::string& text);

}  // namespace gppx::svg
