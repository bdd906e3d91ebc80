#pragma once

#include "gppx/grid.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gppx {

/// On-disk layouts for GridSeries.
///
/// flat-binary: `<name>.json` header
///   {n_lat, n_lon, n_months, start_year, start_month, layout: "cell-major"}
/// plus `<name>.f64`, little-endian float64: flux values cell-major then
/// month, followed by n_cells cell areas and n_cells land fractions.
///
/// csv: a `# key=value,...` metadata line, a column header, then one row per
/// cell: `cell,cell_area,land_frac,<month 0>,...,<month n-1>`.
enum class GridFormat { flat_binary, csv };

GridFormat parse_grid_format(std::string_view name);

/// For flat-binary, `path` may name the header (`x.json`), the payload
/// (`x.f64`) or the bare stem (`x`).
GridSeries load_grid(const std::filesystem::path& path, GridFormat format);
void save_grid(const GridSeries& grid, const std::filesystem::path& path, GridFormat format);

/// Header and payload paths for a flat-binary stem.
std::filesystem::path header_path(const std::filesystem::path& path);
std::filesystem::path payload_path(const std::filesystem::path& path);

// Little-endian float64 blocks, shared with the checkpoint format.
void write_f64_le(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f64_le(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace gppx
