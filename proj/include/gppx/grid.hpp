#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gppx {

// ---------------------------------------------------------------------------
// Calendar
//
// Monthly axes use the 365-day no-leap calendar of the CESM family of models.
// ---------------------------------------------------------------------------

inline constexpr std::array<int, 12> kDaysInMonth{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kSecondsPerYear = 365.0 * kSecondsPerDay;

/// `calendar_month` is 1-based (1 = January).
int days_in_month(int calendar_month);
double seconds_in_month(int calendar_month);

struct MonthStamp {
    int year = 0;
    int month = 1;  // 1..12
    bool operator==(const MonthStamp&) const = default;
};

/// Origin of a monthly time axis.
struct Calendar {
    int start_year = 1850;
    int start_month = 1;

    MonthStamp at(std::size_t index) const;
    /// Offset of (year, month) from the origin; negative before the origin.
    long index_of(int year, int month) const;
    bool operator==(const Calendar&) const = default;
};

/// An analysis period of whole calendar years, inclusive on both ends.
/// 1850-1880 spans 31 years, i.e. 372 months.
struct Period {
    int start_year = 0;
    int end_year = 0;

    std::size_t n_months() const { return static_cast<std::size_t>(end_year - start_year + 1) * 12; }
    /// "1850–80" when both years share a century, "1990–2010" otherwise.
    std::string label() const;
    /// File-name friendly form, "1850-1880".
    std::string slug() const;
    bool operator==(const Period&) const = default;
};

// ---------------------------------------------------------------------------
// Gridded flux field
// ---------------------------------------------------------------------------

/// Monthly flux on a lat x lon grid, in gC m^-2 s^-1.
///
/// `values` is cell-major: the series of cell c occupies
/// values[c * n_months, (c + 1) * n_months). Cells are numbered row-major
/// over (lat, lon).
struct GridSeries {
    std::size_t n_lat = 0;
    std::size_t n_lon = 0;
    std::size_t n_months = 0;
    Calendar calendar;
    std::vector<double> values;
    std::vector<double> cell_area;  // m^2
    std::vector<double> land_frac;  // [0, 1]

    std::size_t n_cells() const { return n_lat * n_lon; }
    std::size_t cell_index(std::size_t lat, std::size_t lon) const { return lat * n_lon + lon; }

    std::span<const double> cell_series(std::size_t cell) const {
        return {values.data() + cell * n_months, n_months};
    }
    double flux(std::size_t cell, std::size_t month) const { return values[cell * n_months + month]; }

    /// Throws ShapeError on inconsistent sizes and DataError on NaN land
    /// values, non-positive area or land fraction outside [0, 1].
    void validate() const;

    /// Months [first, first + count) as a new grid with a shifted calendar.
    GridSeries slice_months(std::size_t first, std::size_t count) const;

    /// The months of `period`; throws ConfigError if the grid does not cover it.
    GridSeries slice_period(const Period& period) const;
};

/// Region as an explicit list of grid cells.
struct RegionMask {
    std::string name;
    std::vector<std::size_t> cells;
    double min_land_frac = 0.10;

    /// Throws ConfigError when a cell index falls outside the grid.
    void validate(const GridSeries& grid) const;

    /// Cells with land fraction strictly above `min_land_frac`, ascending.
    std::vector<std::size_t> effective_cells(const GridSeries& grid) const;
};

/// Per-cell monthly carbon mass, GgC per month, for a subset of grid cells.
struct MassSeries {
    std::vector<std::size_t> cells;  // grid cell ids, one per row
    std::size_t n_months = 0;
    Calendar calendar;
    std::vector<double> values;  // [row][month]

    std::size_t n_cells() const { return cells.size(); }
    std::span<const double> series(std::size_t row) const { return {values.data() + row * n_months, n_months}; }
    std::span<double> series(std::size_t row) { return {values.data() + row * n_months, n_months}; }
    double at(std::size_t row, std::size_t month) const { return values[row * n_months + month]; }
};

/// mass [GgC] = flux * area * land_frac * seconds_in_month / 1e9, over the
/// region's effective cells. Throws EmptyRegionError if none remain.
MassSeries flux_to_mass(const GridSeries& grid, const RegionMask& mask);

/// Monthly mean over the rows of `mass` that belong to `mask`.
std::vector<double> regional_mean_series(const MassSeries& mass, const RegionMask& mask);

}  // namespace gppx
