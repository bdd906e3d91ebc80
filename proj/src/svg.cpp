#include "gppx/svg.hpp"

#include "gppx/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace gppx::svg {

namespace {

constexpr int kMarginLeft = 72;
constexpr int kMarginRight = 150;
constexpr int kMarginTop = 36;
constexpr int kMarginBottom = 52;

std::string header(int width, int height) {
    return fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n"
        "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
        width, height);
}

std::string tick_label(double v) {
    if (v == 0.0) return "0";
    return fmt::format("{:.4g}", v);
}

double nice_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    const double nice = frac <= 1.0 ? 1.0 : frac <= 2.0 ? 2.0 : frac <= 5.0 ? 5.0 : 10.0;
    return nice * mag;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> ticks;
};

Axis linear_axis(double lo, double hi, int target) {
    if (!(hi > lo)) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        lo -= pad;
        hi += pad;
    }
    const double step = nice_step(hi - lo, target);
    Axis a;
    a.lo = std::floor(lo / step) * step;
    a.hi = std::ceil(hi / step) * step;
    const auto n = static_cast<long>(std::llround((a.hi - a.lo) / step));
    for (long i = 0; i <= n; ++i) a.ticks.push_back(a.lo + static_cast<double>(i) * step);
    return a;
}

std::array<int, 3> parse_hex(const std::string& hex) {
    if (hex.size() != 7 || hex[0] != '#') throw ConfigError(fmt::format("colour '{}' is not #rrggbb", hex));
    std::array<int, 3> rgb{};
    for (int i = 0; i < 3; ++i) rgb[static_cast<std::size_t>(i)] = std::stoi(hex.substr(1 + 2 * i, 2), nullptr, 16);
    return rgb;
}

std::string blend_from_white(const std::array<int, 3>& high, double t) {
    t = std::clamp(t, 0.0, 1.0);
    const auto mix = [t](int c) { return static_cast<int>(std::lround(255.0 + (c - 255.0) * t)); };
    return fmt::format("#{:02x}{:02x}{:02x}", mix(high[0]), mix(high[1]), mix(high[2]));
}

}  // namespace

std::string escape(const std::string& text) {
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

std::string region_color(std::size_t index) {
    static constexpr std::array<const char*, 8> kPalette{"#b2182b", "#2166ac", "#1b7837", "#762a83",
                                                         "#e08214", "#01665e", "#8c510a", "#c51b7d"};
    return kPalette[index % kPalette.size()];
}

std::string render_line_chart(const LineChart& chart) {
    const int pw = chart.width - kMarginLeft - kMarginRight;
    const int ph = chart.height - kMarginTop - kMarginBottom;
    if (pw <= 0 || ph <= 0) throw ConfigError("line chart is too small for its margins");

    const auto transform_y = [&](double v) { return chart.log_y ? std::log10(v) : v; };
    const auto usable = [&](double v) { return std::isfinite(v) && (!chart.log_y || v > 0.0); };

    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const LineSeries& s : chart.series) {
        if (!s.x.empty() && s.x.size() != s.y.size()) {
            throw ShapeError(fmt::format("series '{}': {} x values for {} y values", s.name, s.x.size(), s.y.size()));
        }
        parse_hex(s.color);
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            if (!usable(s.y[i])) continue;
            const double x = s.x.empty() ? static_cast<double>(i) : s.x[i];
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, transform_y(s.y[i]));
            y_hi = std::max(y_hi, transform_y(s.y[i]));
        }
    }
    if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
    const Axis ya = linear_axis(y_lo, y_hi, 5);
    const Axis xa = linear_axis(x_lo, x_hi, 6);

    const auto px = [&](double x) { return kMarginLeft + (x - xa.lo) / (xa.hi - xa.lo) * pw; };
    const auto py = [&](double y) { return kMarginTop + ph - (y - ya.lo) / (ya.hi - ya.lo) * ph; };

    std::string out = header(chart.width, chart.height);
    out += fmt::format("<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
                       kMarginLeft + pw / 2, escape(chart.title));

    for (const double t : ya.ticks) {
        const double y = py(t);
        out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#dddddd\"/>\n", kMarginLeft,
                           y, kMarginLeft + pw, y);
        const std::string label = chart.log_y ? tick_label(std::pow(10.0, t)) : tick_label(t);
        out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kMarginLeft - 6, y + 4,
                           label);
    }
    for (const double t : xa.ticks) {
        const double x = px(t);
        out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#000000\"/>\n", x,
                           kMarginTop + ph, kMarginTop + ph + 4);
        out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", x, kMarginTop + ph + 16,
                           tick_label(t));
    }
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000000\"/>\n",
                       kMarginLeft, kMarginTop, pw, ph);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kMarginLeft + pw / 2,
                       chart.height - 12, escape(chart.x_label));
    out += fmt::format(
        "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
        kMarginTop + ph / 2, escape(chart.y_label));

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const LineSeries& s = chart.series[k];
        std::string points;
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            if (!usable(s.y[i])) continue;
            const double x = s.x.empty() ? static_cast<double>(i) : s.x[i];
            if (!points.empty()) points += ' ';
            points += fmt::format("{:.2f},{:.2f}", px(x), py(transform_y(s.y[i])));
        }
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
                           escape(s.color), points);
        const int ly = kMarginTop + 14 + static_cast<int>(k) * 16;
        const int lx = kMarginLeft + pw + 12;
        out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n", lx,
                           ly - 4, lx + 18, ly - 4, escape(s.color));
        out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", lx + 24, ly, escape(s.name));
    }
    out += "</svg>\n";
    return out;
}

std::string render_heat_map(const HeatMap& map) {
    if (map.values.size() != map.n_rows * map.n_cols) {
        throw ShapeError(fmt::format("heat map {}x{} given {} values", map.n_rows, map.n_cols, map.values.size()));
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& v : map.values) {
        if (!v) continue;
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
    }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (map.min) lo = *map.min;
    if (map.max) hi = *map.max;
    const double span = hi > lo ? hi - lo : 1.0;
    const auto high = parse_hex(map.color_high);

    const int cs = map.cell_size;
    const int grid_w = static_cast<int>(map.n_cols) * cs;
    const int grid_h = static_cast<int>(map.n_rows) * cs;
    const int left = 20;
    const int top = 36;
    const int legend_x = left + grid_w + 24;
    const int width = legend_x + 120;
    const int height = top + std::max(grid_h, 120) + 24;

    std::string out = header(width, height);
    out += fmt::format("<text x=\"{}\" y=\"20\" font-size=\"13\">{}</text>\n", left, escape(map.title));
    for (std::size_t r = 0; r < map.n_rows; ++r) {
        for (std::size_t c = 0; c < map.n_cols; ++c) {
            const auto& v = map.values[r * map.n_cols + c];
            const std::string fill = v ? blend_from_white(high, (*v - lo) / span) : std::string("#cccccc");
            out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#ffffff\"/>\n",
                               left + static_cast<int>(c) * cs, top + static_cast<int>(r) * cs, cs, cs, fill);
        }
    }

    // Vertical colour bar, high value at the top.
    constexpr int kSteps = 10;
    constexpr int kBarHeight = 100;
    for (int i = 0; i < kSteps; ++i) {
        const double t = 1.0 - (i + 0.5) / kSteps;
        out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"{}\" fill=\"{}\"/>\n", legend_x,
                           top + i * kBarHeight / kSteps, kBarHeight / kSteps, blend_from_white(high, t));
    }
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"{}\" fill=\"none\" stroke=\"#000000\"/>\n",
                       legend_x, top, kBarHeight);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", legend_x + 20, top + 8, tick_label(hi));
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", legend_x + 20, top + kBarHeight, tick_label(lo));
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", legend_x, top + kBarHeight + 18,
                       escape(map.legend_label));
    out += "</svg>\n";
    return out;
}

}  // namespace gppx::svg
