#include "gppx/synth.hpp"

#include "gppx/errors.hpp"
#include "gppx/rng.hpp"

#include <cstdint>
#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace gppx {

namespace {

using nlohmann::json;

std::vector<double> per_cell(const json& doc, const char* field, std::size_t cells, double fallback) {
    if (!doc.contains(field)) return std::vector<double>(cells, fallback);
    const json& v = doc.at(field);
    if (v.is_number()) return std::vector<double>(cells, v.get<double>());
    if (!v.is_array()) throw SpecError(fmt::format("synth.{}: expected a number or an array of {} numbers", field, cells));
    if (v.size() != cells) {
        throw SpecError(fmt::format("synth.{}: array holds {} entries, grid has {} cells", field, v.size(), cells));
    }
    std::vector<double> out;
    out.reserve(cells);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw SpecError(fmt::format("synth.{}[{}]: expected a number", field, i));
        out.push_back(v[i].get<double>());
    }
    return out;
}

std::size_t count_field(const json& doc, const char* field, std::size_t fallback, const std::string& path) {
    if (!doc.contains(field)) return fallback;
    const json& v = doc.at(field);
    if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))) {
        throw SpecError(fmt::format("{}.{}: expected a non-negative integer", path, field));
    }
    return v.get<std::size_t>();
}

json compact(const std::vector<double>& v) {
    if (!v.empty() && std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return v.front();
    return v;
}

}  // namespace

void SynthSpec::validate() const {
    if (n_lat == 0 || n_lon == 0) throw SpecError("synth.n_lat/n_lon: grid must have at least one cell");
    if (n_months == 0) throw SpecError("synth.n_months: must be positive");
    if (calendar.start_month < 1 || calendar.start_month > 12) {
        throw SpecError(fmt::format("synth.start_month: {} outside 1..12", calendar.start_month));
    }
    const std::size_t cells = n_cells();
    const std::pair<const char*, const std::vector<double>*> fields[] = {
        {"cell_area", &cell_area},       {"land_frac", &land_frac},
        {"base", &base},                 {"trend_linear", &trend_linear},
        {"trend_quadratic", &trend_quadratic}, {"annual_amplitude", &annual_amplitude},
        {"semiannual_amplitude", &semiannual_amplitude}, {"annual_phase", &annual_phase},
        {"noise_std", &noise_std},
    };
    for (const auto& [name, vec] : fields) {
        if (vec->size() != cells) {
            throw SpecError(fmt::format("synth.{}: {} entries, grid has {} cells", name, vec->size(), cells));
        }
        for (std::size_t c = 0; c < cells; ++c) {
            if (!std::isfinite((*vec)[c])) throw SpecError(fmt::format("synth.{}[{}]: not finite", name, c));
        }
    }
    for (std::size_t c = 0; c < cells; ++c) {
        if (!(cell_area[c] > 0.0)) throw SpecError(fmt::format("synth.cell_area[{}]: must be positive", c));
        if (land_frac[c] < 0.0 || land_frac[c] > 1.0) {
            throw SpecError(fmt::format("synth.land_frac[{}]: {} outside [0, 1]", c, land_frac[c]));
        }
        if (noise_std[c] < 0.0) throw SpecError(fmt::format("synth.noise_std[{}]: must be non-negative", c));
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
        const InjectedEvent& e = events[i];
        if (e.cell >= cells) {
            throw SpecError(fmt::format("synth.events[{}]: cell {} outside grid of {} cells", i, e.cell, cells));
        }
        if (e.length == 0 || e.start >= n_months || e.length > n_months - e.start) {
            throw SpecError(fmt::format("synth.events[{}]: span [{}, {}) outside [0, {})", i, e.start,
                                        e.start + e.length, n_months));
        }
        if (!(e.suppression >= 0.0 && e.suppression <= 1.0)) {
            throw SpecError(fmt::format("synth.events[{}]: suppression {} outside [0, 1]", i, e.suppression));
        }
    }
}

SynthSpec synth_spec_from_json(const json& doc) {
    if (!doc.is_object()) throw SpecError("synth: expected a JSON object");
    SynthSpec spec;
    spec.n_lat = count_field(doc, "n_lat", 1, "synth");
    spec.n_lon = count_field(doc, "n_lon", 1, "synth");
    spec.n_months = count_field(doc, "n_months", 36, "synth");
    if (doc.contains("start_year")) {
        if (!doc.at("start_year").is_number_integer()) throw SpecError("synth.start_year: expected an integer");
        spec.calendar.start_year = doc.at("start_year").get<int>();
    }
    if (doc.contains("start_month")) {
        if (!doc.at("start_month").is_number_integer()) throw SpecError("synth.start_month: expected an integer");
        spec.calendar.start_month = doc.at("start_month").get<int>();
    }
    const std::size_t cells = spec.n_cells();
    spec.cell_area = per_cell(doc, "cell_area", cells, 1e10);
    spec.land_frac = per_cell(doc, "land_frac", cells, 1.0);
    spec.base = per_cell(doc, "base", cells, 4e-5);
    spec.trend_linear = per_cell(doc, "trend_linear", cells, 0.0);
    spec.trend_quadratic = per_cell(doc, "trend_quadratic", cells, 0.0);
    spec.annual_amplitude = per_cell(doc, "annual_amplitude", cells, 2e-5);
    spec.semiannual_amplitude = per_cell(doc, "semiannual_amplitude", cells, 0.0);
    spec.annual_phase = per_cell(doc, "annual_phase", cells, 0.0);
    spec.noise_std = per_cell(doc, "noise_std", cells, 0.0);

    if (doc.contains("events")) {
        const json& events = doc.at("events");
        if (!events.is_array()) throw SpecError("synth.events: expected an array");
        for (std::size_t i = 0; i < events.size(); ++i) {
            const json& e = events[i];
            const std::string path = fmt::format("synth.events[{}]", i);
            if (!e.is_object()) throw SpecError(path + ": expected an object");
            InjectedEvent ev;
            ev.cell = count_field(e, "cell", 0, path);
            ev.start = count_field(e, "start", 0, path);
            ev.length = count_field(e, "length", 1, path);
            if (e.contains("suppression")) {
                if (!e.at("suppression").is_number()) throw SpecError(path + ".suppression: expected a number");
                ev.suppression = e.at("suppression").get<double>();
            }
            spec.events.push_back(ev);
        }
    }
    spec.validate();
    return spec;
}

json synth_spec_to_json(const SynthSpec& spec) {
    json doc;
    doc["n_lat"] = spec.n_lat;
    doc["n_lon"] = spec.n_lon;
    doc["n_months"] = spec.n_months;
    doc["start_year"] = spec.calendar.start_year;
    doc["start_month"] = spec.calendar.start_month;
    doc["cell_area"] = compact(spec.cell_area);
    doc["land_frac"] = compact(spec.land_frac);
    doc["base"] = compact(spec.base);
    doc["trend_linear"] = compact(spec.trend_linear);
    doc["trend_quadratic"] = compact(spec.trend_quadratic);
    doc["annual_amplitude"] = compact(spec.annual_amplitude);
    doc["semiannual_amplitude"] = compact(spec.semiannual_amplitude);
    doc["annual_phase"] = compact(spec.annual_phase);
    doc["noise_std"] = compact(spec.noise_std);
    doc["events"] = json::array();
    for (const InjectedEvent& e : spec.events) {
        doc["events"].push_back({{"cell", e.cell}, {"start", e.start}, {"length", e.length},
                                 {"suppression", e.suppression}});
    }
    return doc;
}

SynthResult synth_generate(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t cells = spec.n_cells();
    const std::size_t months = spec.n_months;
    constexpr double two_pi = 2.0 * std::numbers::pi;

    SynthResult result;
    GridSeries& grid = result.grid;
    grid.n_lat = spec.n_lat;
    grid.n_lon = spec.n_lon;
    grid.n_months = months;
    grid.calendar = spec.calendar;
    grid.cell_area = spec.cell_area;
    grid.land_frac = spec.land_frac;
    grid.values.resize(cells * months);

    Rng rng(seed);
    for (std::size_t c = 0; c < cells; ++c) {
        for (std::size_t m = 0; m < months; ++m) {
            const double t = static_cast<double>(m);
            const double years = t / 12.0;
            const double phase = t - spec.annual_phase[c];
            double v = spec.base[c] + spec.trend_linear[c] * years + spec.trend_quadratic[c] * years * years +
                       spec.annual_amplitude[c] * std::sin(two_pi * phase / 12.0) +
                       spec.semiannual_amplitude[c] * std::sin(2.0 * two_pi * phase / 12.0);
            if (spec.noise_std[c] > 0.0) v += spec.noise_std[c] * rng.normal();
            grid.values[c * months + m] = v;
        }
    }

    for (std::size_t i = 0; i < spec.events.size(); ++i) {
        const InjectedEvent& e = spec.events[i];
        for (std::size_t m = e.start; m < e.start + e.length; ++m) {
            grid.values[e.cell * months + m] *= 1.0 - e.suppression;
            result.truth.push_back({e.cell, m, i});
        }
    }
    for (double& v : grid.values) v = std::max(v, 0.0);

    std::sort(result.truth.begin(), result.truth.end(), [](const TruthLabel& a, const TruthLabel& b) {
        return a.cell != b.cell ? a.cell < b.cell : (a.month != b.month ? a.month < b.month : a.event < b.event);
    });
    result.truth.erase(std::unique(result.truth.begin(), result.truth.end(),
                                   [](const TruthLabel& a, const TruthLabel& b) {
                                       return a.cell == b.cell && a.month == b.month;
                                   }),
                       result.truth.end());
    return result;
}

}  // namespace gppx
