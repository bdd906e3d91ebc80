#include "gppx/config.hpp"

#include "gppx/errors.hpp"

#include <cstdint>
#include <algorithm>
#include <set>
#include <tuple>

#include <fmt/format.h>

namespace gppx {

using nlohmann::json;

namespace {

const std::set<std::string> kTopLevelKeys{"schema_version", "input",   "regions", "periods", "method",
                                          "vae",            "ssa",     "extremes", "gridsearch", "output_dir",
                                          "seed",           "jobs"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", path, key));
    }
}

const json& object_at(const json& doc, const char* key, const std::string& path) {
    const json& v = doc.at(key);
    if (!v.is_object()) throw ConfigError(fmt::format("{}.{}: expected an object", path, key));
    return v;
}

template <class T>
T read(const json& v, const std::string& path) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(fmt::format("{}: wrong type ({})", path, v.type_name()));
    }
}

std::size_t read_count(const json& v, const std::string& path) {
    if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))) {
        throw ConfigError(fmt::format("{}: expected a non-negative integer", path));
    }
    return v.get<std::size_t>();
}

template <class T>
void maybe(const json& obj, const char* key, const std::string& path, T& out) {
    if (!obj.contains(key)) return;
    const std::string p = fmt::format("{}.{}", path, key);
    if constexpr (std::is_same_v<T, std::size_t>) {
        out = read_count(obj.at(key), p);
    } else {
        out = read<T>(obj.at(key), p);
    }
}

std::vector<std::size_t> read_sizes(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(fmt::format("{}: expected an array", path));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_count(v[i], fmt::format("{}[{}]", path, i)));
    return out;
}

std::pair<std::size_t, std::size_t> read_range(const json& v, const std::string& path) {
    const auto r = read_sizes(v, path);
    if (r.size() != 2 || r[0] > r[1]) throw ConfigError(fmt::format("{}: expected [first, last] with first <= last", path));
    return {r[0], r[1]};
}

RegionSpec read_region(const json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError(fmt::format("{}: expected an object", path));
    reject_unknown(v, {"name", "cells", "lat", "lon", "min_land_frac"}, path);
    RegionSpec r;
    if (!v.contains("name")) throw ConfigError(fmt::format("{}.name: required", path));
    r.name = read<std::string>(v.at("name"), path + ".name");
    if (r.name.empty() || r.name.find_first_of(",./\\ |") != std::string::npos) {
        throw ConfigError(fmt::format("{}.name: '{}' must be non-empty without spaces, dots, commas, slashes or '|'", path,
                                      r.name));
    }
    const bool has_cells = v.contains("cells");
    const bool has_box = v.contains("lat") || v.contains("lon");
    if (has_cells == has_box) throw ConfigError(fmt::format("{}: give either 'cells' or both 'lat' and 'lon'", path));
    if (has_cells) {
        r.cells = read_sizes(v.at("cells"), path + ".cells");
    } else {
        if (!v.contains("lat") || !v.contains("lon")) {
            throw ConfigError(fmt::format("{}: a box needs both 'lat' and 'lon' ranges", path));
        }
        RegionSpec::Box b;
        std::tie(b.lat_first, b.lat_last) = read_range(v.at("lat"), path + ".lat");
        std::tie(b.lon_first, b.lon_last) = read_range(v.at("lon"), path + ".lon");
        r.box = b;
    }
    maybe(v, "min_land_frac", path, r.min_land_frac);
    return r;
}

Period read_period(const json& v, const std::string& path) {
    if (v.is_array() && v.size() == 2) {
        return {read<int>(v[0], path + "[0]"), read<int>(v[1], path + "[1]")};
    }
    if (v.is_object() && v.contains("start") && v.contains("end")) {
        return {read<int>(v.at("start"), path + ".start"), read<int>(v.at("end"), path + ".end")};
    }
    throw ConfigError(fmt::format("{}: expected [start_year, end_year] or {{\"start\", \"end\"}}", path));
}

}  // namespace

const char* to_string(MethodSelection m) {
    switch (m) {
        case MethodSelection::vae: return "vae";
        case MethodSelection::ssa: return "ssa";
        case MethodSelection::both: return "both";
    }
    return "both";
}

MethodSelection parse_method_selection(const std::string& name) {
    if (name == "vae") return MethodSelection::vae;
    if (name == "ssa") return MethodSelection::ssa;
    if (name == "both") return MethodSelection::both;
    throw ConfigError(fmt::format("method '{}': expected vae, ssa or both", name));
}

std::vector<Method> methods_of(MethodSelection m) {
    switch (m) {
        case MethodSelection::vae: return {Method::vae};
        case MethodSelection::ssa: return {Method::ssa};
        case MethodSelection::both: return {Method::vae, Method::ssa};
    }
    return {};
}

RegionMask RegionSpec::resolve(const GridSeries& grid) const {
    RegionMask mask;
    mask.name = name;
    mask.min_land_frac = min_land_frac;
    if (box) {
        if (box->lat_last >= grid.n_lat || box->lon_last >= grid.n_lon) {
            throw ConfigError(fmt::format("region {}: box lat [{}, {}] lon [{}, {}] exceeds the {}x{} grid", name,
                                          box->lat_first, box->lat_last, box->lon_first, box->lon_last, grid.n_lat,
                                          grid.n_lon));
        }
        for (std::size_t i = box->lat_first; i <= box->lat_last; ++i) {
            for (std::size_t j = box->lon_first; j <= box->lon_last; ++j) mask.cells.push_back(grid.cell_index(i, j));
        }
    } else {
        mask.cells = cells;
    }
    mask.validate(grid);
    return mask;
}

void RunConfig::validate() const {
    if (schema_version != kConfigSchemaVersion) {
        throw ConfigError(fmt::format("schema_version {} is not supported (expected {})", schema_version,
                                      kConfigSchemaVersion));
    }
    if (!grid_path && !synth) throw ConfigError("input: give either 'grid' or 'synth'");
    if (regions.empty()) throw ConfigError("regions: at least one region is required");
    std::set<std::string> names;
    for (const RegionSpec& r : regions) {
        if (!names.insert(r.name).second) throw ConfigError(fmt::format("regions: duplicate name '{}'", r.name));
    }
    if (periods.empty()) throw ConfigError("periods: at least one period is required");
    for (std::size_t i = 0; i < periods.size(); ++i) {
        if (periods[i].end_year < periods[i].start_year) {
            throw ConfigError(fmt::format("periods[{}]: end year {} precedes start year {}", i, periods[i].end_year,
                                          periods[i].start_year));
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (periods[j] == periods[i]) throw ConfigError(fmt::format("periods[{}]: duplicate of periods[{}]", i, j));
        }
    }
    if (jobs == 0) throw ConfigError("jobs must be at least 1");
    vae_arch.validate();
    vae_train.validate();
    if (search.trial_count() == 0) throw ConfigError("gridsearch: every axis needs at least one value");
    if (search.trial_count() > vae::kMaxSearchTrials) {
        throw ConfigError(fmt::format("gridsearch: {} trials exceed the limit of {}", search.trial_count(),
                                      vae::kMaxSearchTrials));
    }
    if (synth) synth->validate();
}

void RunConfig::validate_against(const GridSeries& grid) const {
    for (const Period& p : periods) {
        const long first = grid.calendar.index_of(p.start_year, 1);
        const long last = first + static_cast<long>(p.n_months());
        if (first < 0 || last > static_cast<long>(grid.n_months)) {
            const MonthStamp end = grid.calendar.at(grid.n_months - 1);
            throw ConfigError(fmt::format("period {}: outside the grid span {}-{:02} to {}-{:02}", p.label(),
                                          grid.calendar.start_year, grid.calendar.start_month, end.year, end.month));
        }
    }
    for (const RegionSpec& r : regions) r.resolve(grid);
}

RunConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown(doc, kTopLevelKeys, "config");
    RunConfig c;
    c.base_dir = base_dir;
    if (!doc.contains("schema_version")) throw ConfigError("schema_version: required");
    c.schema_version = read<int>(doc.at("schema_version"), "schema_version");

    if (doc.contains("input")) {
        const json& in = object_at(doc, "input", "config");
        reject_unknown(in, {"grid", "format", "synth"}, "input");
        if (in.contains("grid") && in.contains("synth")) throw ConfigError("input: give 'grid' or 'synth', not both");
        if (in.contains("grid")) c.grid_path = base_dir / read<std::string>(in.at("grid"), "input.grid");
        if (in.contains("format")) c.grid_format = parse_grid_format(read<std::string>(in.at("format"), "input.format"));
        if (in.contains("synth")) c.synth = synth_spec_from_json(in.at("synth"));
    }

    if (doc.contains("regions")) {
        const json& regions = doc.at("regions");
        if (!regions.is_array()) throw ConfigError("regions: expected an array");
        for (std::size_t i = 0; i < regions.size(); ++i) {
            c.regions.push_back(read_region(regions[i], fmt::format("regions[{}]", i)));
        }
    }
    if (doc.contains("periods")) {
        const json& periods = doc.at("periods");
        if (!periods.is_array()) throw ConfigError("periods: expected an array");
        for (std::size_t i = 0; i < periods.size(); ++i) {
            c.periods.push_back(read_period(periods[i], fmt::format("periods[{}]", i)));
        }
    }
    if (doc.contains("method")) c.method = parse_method_selection(read<std::string>(doc.at("method"), "method"));

    if (doc.contains("vae")) {
        const json& v = object_at(doc, "vae", "config");
        reject_unknown(v, {"hidden", "latent_dim", "dropout", "beta", "max_epochs", "early_stop_patience",
                           "plateau_patience", "plateau_factor", "learning_rate", "batch_size",
                           "validation_fraction", "recon_reduction"},
                       "vae");
        if (v.contains("hidden")) c.vae_arch.hidden = read_sizes(v.at("hidden"), "vae.hidden");
        maybe(v, "latent_dim", "vae", c.vae_arch.latent_dim);
        maybe(v, "dropout", "vae", c.vae_arch.dropout);
        maybe(v, "beta", "vae", c.vae_arch.beta);
        if (v.contains("recon_reduction")) {
            c.vae_arch.recon_reduction =
                vae::parse_recon_reduction(read<std::string>(v.at("recon_reduction"), "vae.recon_reduction"));
        }
        maybe(v, "max_epochs", "vae", c.vae_train.max_epochs);
        maybe(v, "early_stop_patience", "vae", c.vae_train.early_stop_patience);
        maybe(v, "plateau_patience", "vae", c.vae_train.plateau_patience);
        maybe(v, "plateau_factor", "vae", c.vae_train.plateau_factor);
        maybe(v, "learning_rate", "vae", c.vae_train.learning_rate);
        maybe(v, "batch_size", "vae", c.vae_train.batch_size);
        maybe(v, "validation_fraction", "vae", c.vae_train.validation_fraction);
    }
    if (doc.contains("ssa")) {
        const json& s = object_at(doc, "ssa", "config");
        reject_unknown(s, {"window", "trend_cutoff", "seasonal_period", "seasonal_tolerance", "max_harmonic"}, "ssa");
        maybe(s, "window", "ssa", c.ssa.window);
        maybe(s, "trend_cutoff", "ssa", c.ssa.trend_cutoff);
        maybe(s, "seasonal_period", "ssa", c.ssa.seasonal_period);
        maybe(s, "seasonal_tolerance", "ssa", c.ssa.seasonal_tolerance);
        maybe(s, "max_harmonic", "ssa", c.ssa.max_harmonic);
    }
    if (doc.contains("extremes")) {
        const json& e = object_at(doc, "extremes", "config");
        reject_unknown(e, {"threshold_mode"}, "extremes");
        if (e.contains("threshold_mode")) {
            c.threshold_mode =
                extremes::parse_threshold_mode(read<std::string>(e.at("threshold_mode"), "extremes.threshold_mode"));
        }
    }
    // Unset search axes fall back to the single configured value.
    c.search.latent_dims = {c.vae_arch.latent_dim};
    c.search.hidden = {c.vae_arch.hidden};
    c.search.learning_rates = {c.vae_train.learning_rate};
    if (doc.contains("gridsearch")) {
        const json& g = object_at(doc, "gridsearch", "config");
        reject_unknown(g, {"latent_dims", "hidden", "learning_rates"}, "gridsearch");
        if (g.contains("latent_dims")) c.search.latent_dims = read_sizes(g.at("latent_dims"), "gridsearch.latent_dims");
        if (g.contains("hidden")) {
            const json& h = g.at("hidden");
            if (!h.is_array()) throw ConfigError("gridsearch.hidden: expected an array of arrays");
            c.search.hidden.clear();
            for (std::size_t i = 0; i < h.size(); ++i) {
                c.search.hidden.push_back(read_sizes(h[i], fmt::format("gridsearch.hidden[{}]", i)));
            }
        }
        if (g.contains("learning_rates")) {
            c.search.learning_rates = read<std::vector<double>>(g.at("learning_rates"), "gridsearch.learning_rates");
        }
    }
    if (doc.contains("output_dir")) c.output_dir = base_dir / read<std::string>(doc.at("output_dir"), "output_dir");
    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!(s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0))) {
            throw ConfigError("seed: expected a non-negative integer");
        }
        c.seed = s.get<std::uint64_t>();
    }
    maybe(doc, "jobs", "config", c.jobs);
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const DataError& e) {
        throw ConfigError(fmt::format("config {}: {}", path.string(), e.what()));
    }
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config {}: invalid JSON: {}", path.string(), e.what()));
    }
    const std::filesystem::path dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return config_from_json(doc, dir);
}

}  // namespace gppx
