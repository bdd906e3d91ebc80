#pragma once

#include "gppx/grid.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

namespace gppx {

/// A multiplicative productivity drop: months [start, start + length) of
/// `cell` are scaled by (1 - suppression).
struct InjectedEvent {
    std::size_t cell = 0;
    std::size_t start = 0;
    std::size_t length = 1;
    double suppression = 0.5;
};

/// Desk-scale stand-in for model output. Each per-cell vector holds one
/// value per cell. With t the month index and y = t / 12 the elapsed years,
///
///   flux = base + trend_linear*y + trend_quadratic*y^2
///        + annual_amplitude * sin(2*pi*(t - annual_phase)/12)
///        + semiannual_amplitude * sin(4*pi*(t - annual_phase)/12)
///        + noise_std * N(0, 1)
///
/// then events are applied and the result is clamped at zero.
/// See docs/synth_spec.md for the JSON schema.
struct SynthSpec {
    std::size_t n_lat = 1;
    std::size_t n_lon = 1;
    std::size_t n_months = 36;
    Calendar calendar;
    std::vector<double> cell_area;
    std::vector<double> land_frac;
    std::vector<double> base;
    std::vector<double> trend_linear;
    std::vector<double> trend_quadratic;
    std::vector<double> annual_amplitude;
    std::vector<double> semiannual_amplitude;
    std::vector<double> annual_phase;
    std::vector<double> noise_std;
    std::vector<InjectedEvent> events;

    std::size_t n_cells() const { return n_lat * n_lon; }

    /// Throws SpecError naming the offending field path, e.g.
    /// "synth.events[3]: span [370, 373) outside [0, 372)".
    void validate() const;
};

/// Builds a spec from JSON. Per-cell fields accept either a scalar (applied
/// to every cell) or an array of n_lat*n_lon numbers.
SynthSpec synth_spec_from_json(const nlohmann::json& doc);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

/// One ground-truth (cell, month) sample touched by injected event `event`.
struct TruthLabel {
    std::size_t cell = 0;
    std::size_t month = 0;
    std::size_t event = 0;
    bool operator==(const TruthLabel&) const = default;
};

struct SynthResult {
    GridSeries grid;
    std::vector<TruthLabel> truth;  // sorted by (cell, month)
};

SynthResult synth_generate(const SynthSpec& spec, std::uint64_t seed);

}  // namespace gppx
