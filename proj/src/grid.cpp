#include "gppx/grid.hpp"

#include "gppx/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace gppx {

void GridSeries::validate() const {
    const std::size_t cells = n_cells();
    if (values.size() != cells * n_months) {
        throw ShapeError(fmt::format("grid values hold {} entries, expected n_lat*n_lon*n_months = {}",
                                     values.size(), cells * n_months));
    }
    if (cell_area.size() != cells || land_frac.size() != cells) {
        throw ShapeError(fmt::format("cell_area/land_frac hold {}/{} entries, expected {}", cell_area.size(),
                                     land_frac.size(), cells));
    }
    if (calendar.start_month < 1 || calendar.start_month > 12) {
        throw DataError(fmt::format("start_month {} outside 1..12", calendar.start_month));
    }
    for (std::size_t c = 0; c < cells; ++c) {
        if (!(cell_area[c] > 0.0) || !std::isfinite(cell_area[c])) {
            throw DataError(fmt::format("cell {} has non-positive area {}", c, cell_area[c]));
        }
        if (!(land_frac[c] >= 0.0 && land_frac[c] <= 1.0)) {
            throw DataError(fmt::format("cell {} has land fraction {} outside [0, 1]", c, land_frac[c]));
        }
        if (land_frac[c] > 0.0) {
            const auto s = cell_series(c);
            const auto bad = std::find_if(s.begin(), s.end(), [](double v) { return std::isnan(v); });
            if (bad != s.end()) {
                throw DataError(fmt::format("cell {} (land fraction {}) has NaN at month {}", c, land_frac[c],
                                            bad - s.begin()));
            }
        }
    }
}

GridSeries GridSeries::slice_months(std::size_t first, std::size_t count) const {
    if (first + count > n_months) {
        throw ConfigError(fmt::format("month slice [{}, {}) exceeds grid length {}", first, first + count, n_months));
    }
    GridSeries out;
    out.n_lat = n_lat;
    out.n_lon = n_lon;
    out.n_months = count;
    const MonthStamp origin = calendar.at(first);
    out.calendar = {origin.year, origin.month};
    out.cell_area = cell_area;
    out.land_frac = land_frac;
    out.values.reserve(n_cells() * count);
    for (std::size_t c = 0; c < n_cells(); ++c) {
        const auto s = cell_series(c).subspan(first, count);
        out.values.insert(out.values.end(), s.begin(), s.end());
    }
    return out;
}

GridSeries GridSeries::slice_period(const Period& period) const {
    if (period.end_year < period.start_year) {
        throw ConfigError(fmt::format("period {} ends before it starts", period.slug()));
    }
    const long first = calendar.index_of(period.start_year, 1);
    const long last = first + static_cast<long>(period.n_months());
    if (first < 0 || last > static_cast<long>(n_months)) {
        const MonthStamp end = calendar.at(n_months == 0 ? 0 : n_months - 1);
        throw ConfigError(fmt::format("period {} lies outside the grid span {}-{:02}..{}-{:02}", period.slug(),
                                      calendar.start_year, calendar.start_month, end.year, end.month));
    }
    return slice_months(static_cast<std::size_t>(first), period.n_months());
}

void RegionMask::validate(const GridSeries& grid) const {
    for (const std::size_t c : cells) {
        if (c >= grid.n_cells()) {
            throw ConfigError(
                fmt::format("region {}: cell index {} outside grid of {} cells", name, c, grid.n_cells()));
        }
    }
}

std::vector<std::size_t> RegionMask::effective_cells(const GridSeries& grid) const {
    validate(grid);
    std::vector<std::size_t> out;
    for (const std::size_t c : cells) {
        if (grid.land_frac[c] > min_land_frac) out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

MassSeries flux_to_mass(const GridSeries& grid, const RegionMask& mask) {
    MassSeries mass;
    mass.cells = mask.effective_cells(grid);
    if (mass.cells.empty()) {
        throw EmptyRegionError(fmt::format("region {} has no cells with land fraction above {}", mask.name,
                                           mask.min_land_frac));
    }
    mass.n_months = grid.n_months;
    mass.calendar = grid.calendar;
    mass.values.resize(mass.cells.size() * grid.n_months);

    std::vector<double> seconds(grid.n_months);
    for (std::size_t m = 0; m < grid.n_months; ++m) seconds[m] = seconds_in_month(grid.calendar.at(m).month);

    for (std::size_t row = 0; row < mass.cells.size(); ++row) {
        const std::size_t c = mass.cells[row];
        const double scale = grid.cell_area[c] * grid.land_frac[c] / 1e9;
        const auto flux = grid.cell_series(c);
        auto out = mass.series(row);
        for (std::size_t m = 0; m < grid.n_months; ++m) out[m] = flux[m] * scale * seconds[m];
    }
    return mass;
}

std::vector<double> regional_mean_series(const MassSeries& mass, const RegionMask& mask) {
    std::vector<double> mean(mass.n_months, 0.0);
    std::size_t used = 0;
    for (std::size_t row = 0; row < mass.n_cells(); ++row) {
        if (std::find(mask.cells.begin(), mask.cells.end(), mass.cells[row]) == mask.cells.end()) continue;
        const auto s = mass.series(row);
        for (std::size_t m = 0; m < mass.n_months; ++m) mean[m] += s[m];
        ++used;
    }
    if (used == 0) {
        throw EmptyRegionError(fmt::format("region {} shares no cells with the mass series", mask.name));
    }
    for (double& v : mean) v /= static_cast<double>(used);
    return mean;
}

}  // namespace gppx
