#include "gppx/grid_io.hpp"

#include "gppx/errors.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace gppx {

namespace {

using nlohmann::json;

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0x00000000000000ffULL) << 56) | ((v & 0x000000000000ff00ULL) << 40) |
            ((v & 0x0000000000ff0000ULL) << 24) | ((v & 0x00000000ff000000ULL) << 8) |
            ((v & 0x000000ff00000000ULL) >> 8) | ((v & 0x0000ff0000000000ULL) >> 24) |
            ((v & 0x00ff000000000000ULL) >> 40) | ((v & 0xff00000000000000ULL) >> 56);
    }
    return v;
}

std::size_t header_count(const json& header, const char* field) {
    if (!header.contains(field)) throw FormatError(fmt::format("grid header: missing field '{}'", field));
    const json& v = header.at(field);
    if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))) {
        throw FormatError(fmt::format("grid header: field '{}' must be a non-negative integer", field));
    }
    return v.get<std::size_t>();
}

int header_int(const json& header, const char* field) {
    if (!header.contains(field)) throw FormatError(fmt::format("grid header: missing field '{}'", field));
    const json& v = header.at(field);
    if (!v.is_number_integer()) throw FormatError(fmt::format("grid header: field '{}' must be an integer", field));
    return v.get<int>();
}

double parse_double(std::string_view token, std::size_t line, std::size_t column) {
    double v = 0.0;
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\r')) token.remove_suffix(1);
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        if (token == "nan" || token == "NaN") return std::numeric_limits<double>::quiet_NaN();
        throw FormatError(fmt::format("grid csv line {} column {}: '{}' is not a number", line, column, token));
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

GridSeries load_flat_binary(const std::filesystem::path& path) {
    const auto hpath = header_path(path);
    json header;
    try {
        header = json::parse(read_text(hpath));
    } catch (const json::parse_error& e) {
        throw FormatError(fmt::format("grid header {}: {}", hpath.string(), e.what()));
    }
    if (!header.is_object()) throw FormatError("grid header: top level must be an object");

    GridSeries grid;
    grid.n_lat = header_count(header, "n_lat");
    grid.n_lon = header_count(header, "n_lon");
    grid.n_months = header_count(header, "n_months");
    grid.calendar.start_year = header_int(header, "start_year");
    grid.calendar.start_month = header_int(header, "start_month");
    if (grid.calendar.start_month < 1 || grid.calendar.start_month > 12) {
        throw FormatError(fmt::format("grid header: field 'start_month' = {} outside 1..12",
                                      grid.calendar.start_month));
    }
    if (!header.contains("layout")) throw FormatError("grid header: missing field 'layout'");
    if (!header.at("layout").is_string() || header.at("layout").get<std::string>() != "cell-major") {
        throw FormatError("grid header: field 'layout' must be \"cell-major\"");
    }

    std::vector<double> payload = read_f64_le(payload_path(path));
    const std::size_t cells = grid.n_cells();
    const std::size_t expected = cells * grid.n_months + 2 * cells;
    if (payload.size() != expected) {
        const std::size_t flux_values = payload.size() >= 2 * cells ? payload.size() - 2 * cells : 0;
        throw ShapeError(fmt::format(
            "grid payload holds {} values ({} flux values after the area/land blocks); header "
            "{}x{} cells x {} months requires {} flux values",
            payload.size(), flux_values, grid.n_lat, grid.n_lon, grid.n_months, cells * grid.n_months));
    }
    const auto flux_end = payload.begin() + static_cast<std::ptrdiff_t>(cells * grid.n_months);
    grid.values.assign(payload.begin(), flux_end);
    grid.cell_area.assign(flux_end, flux_end + static_cast<std::ptrdiff_t>(cells));
    grid.land_frac.assign(flux_end + static_cast<std::ptrdiff_t>(cells), payload.end());
    grid.validate();
    return grid;
}

void save_flat_binary(const GridSeries& grid, const std::filesystem::path& path) {
    json header;
    header["n_lat"] = grid.n_lat;
    header["n_lon"] = grid.n_lon;
    header["n_months"] = grid.n_months;
    header["start_year"] = grid.calendar.start_year;
    header["start_month"] = grid.calendar.start_month;
    header["layout"] = "cell-major";
    write_text(header_path(path), header.dump(2) + "\n");

    std::vector<double> payload;
    payload.reserve(grid.values.size() + 2 * grid.n_cells());
    payload.insert(payload.end(), grid.values.begin(), grid.values.end());
    payload.insert(payload.end(), grid.cell_area.begin(), grid.cell_area.end());
    payload.insert(payload.end(), grid.land_frac.begin(), grid.land_frac.end());
    write_f64_le(payload_path(path), payload);
}

GridSeries load_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("#", 0) != 0) {
        throw FormatError("grid csv: first line must be the '# key=value,...' metadata line");
    }
    json header = json::object();
    for (std::string_view kv : split(std::string_view(line).substr(1), ',')) {
        while (!kv.empty() && kv.front() == ' ') kv.remove_prefix(1);
        if (kv.empty()) continue;
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) throw FormatError(fmt::format("grid csv metadata: malformed entry '{}'", kv));
        const std::string key(kv.substr(0, eq));
        const std::string value(kv.substr(eq + 1));
        if (key == "layout") {
            header[key] = value;
            continue;
        }
        long parsed = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            throw FormatError(fmt::format("grid csv metadata: field '{}' must be an integer", key));
        }
        header[key] = parsed;
    }

    GridSeries grid;
    grid.n_lat = header_count(header, "n_lat");
    grid.n_lon = header_count(header, "n_lon");
    grid.n_months = header_count(header, "n_months");
    grid.calendar.start_year = header_int(header, "start_year");
    grid.calendar.start_month = header_int(header, "start_month");

    if (!std::getline(in, line)) throw FormatError("grid csv: missing column header");
    const std::size_t cells = grid.n_cells();
    grid.values.assign(cells * grid.n_months, 0.0);
    grid.cell_area.assign(cells, 0.0);
    grid.land_frac.assign(cells, 0.0);
    std::vector<bool> seen(cells, false);

    std::size_t line_no = 2;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split(line, ',');
        if (fields.size() != 3 + grid.n_months) {
            throw ShapeError(fmt::format("grid csv line {}: {} columns, expected 3 + {} months", line_no,
                                         fields.size(), grid.n_months));
        }
        const double cell_value = parse_double(fields[0], line_no, 0);
        if (cell_value < 0 || cell_value >= static_cast<double>(cells) || cell_value != std::floor(cell_value)) {
            throw ShapeError(fmt::format("grid csv line {}: cell id {} outside grid", line_no, fields[0]));
        }
        const auto c = static_cast<std::size_t>(cell_value);
        if (seen[c]) throw ShapeError(fmt::format("grid csv line {}: duplicate cell {}", line_no, c));
        seen[c] = true;
        grid.cell_area[c] = parse_double(fields[1], line_no, 1);
        grid.land_frac[c] = parse_double(fields[2], line_no, 2);
        for (std::size_t m = 0; m < grid.n_months; ++m) {
            grid.values[c * grid.n_months + m] = parse_double(fields[3 + m], line_no, 3 + m);
        }
        ++rows;
    }
    if (rows != cells) throw ShapeError(fmt::format("grid csv: {} cell rows, header requires {}", rows, cells));
    grid.validate();
    return grid;
}

void save_csv(const GridSeries& grid, const std::filesystem::path& path) {
    std::string out = fmt::format("# n_lat={},n_lon={},n_months={},start_year={},start_month={},layout=cell-major\n",
                                  grid.n_lat, grid.n_lon, grid.n_months, grid.calendar.start_year,
                                  grid.calendar.start_month);
    out += "cell,cell_area,land_frac";
    for (std::size_t m = 0; m < grid.n_months; ++m) {
        const MonthStamp s = grid.calendar.at(m);
        out += fmt::format(",{}-{:02}", s.year, s.month);
    }
    out += '\n';
    for (std::size_t c = 0; c < grid.n_cells(); ++c) {
        out += fmt::format("{},{},{}", c, grid.cell_area[c], grid.land_frac[c]);
        for (const double v : grid.cell_series(c)) out += fmt::format(",{}", v);
        out += '\n';
    }
    write_text(path, out);
}

}  // namespace

GridFormat parse_grid_format(std::string_view name) {
    if (name == "flat-binary" || name == "binary") return GridFormat::flat_binary;
    if (name == "csv") return GridFormat::csv;
    throw ConfigError(fmt::format("unknown grid format '{}' (expected flat-binary or csv)", name));
}

std::filesystem::path header_path(const std::filesystem::path& path) {
    auto p = path;
    return p.replace_extension(".json");
}

std::filesystem::path payload_path(const std::filesystem::path& path) {
    auto p = path;
    return p.replace_extension(".f64");
}

GridSeries load_grid(const std::filesystem::path& path, GridFormat format) {
    return format == GridFormat::flat_binary ? load_flat_binary(path) : load_csv(path);
}

void save_grid(const GridSeries& grid, const std::filesystem::path& path, GridFormat format) {
    grid.validate();
    if (format == GridFormat::flat_binary) {
        save_flat_binary(grid, path);
    } else {
        save_csv(grid, path);
    }
}

void write_f64_le(const std::filesystem::path& path, std::span<const double> values) {
    std::vector<std::uint64_t> words(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) words[i] = to_le(std::bit_cast<std::uint64_t>(values[i]));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot open {} for writing", path.string()));
    out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 8));
    if (!out) throw DataError(fmt::format("write to {} failed", path.string()));
}

std::vector<double> read_f64_le(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0) {
        throw ShapeError(fmt::format("{}: {} bytes is not a whole number of float64 values", path.string(),
                                     bytes.size()));
    }
    std::vector<double> values(bytes.size() / 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t w = 0;
        std::memcpy(&w, bytes.data() + 8 * i, 8);
        values[i] = std::bit_cast<double>(to_le(w));
    }
    return values;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot open {} for writing", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError(fmt::format("write to {} failed", path.string()));
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace gppx
