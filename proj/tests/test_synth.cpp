#include "generators.hpp"

#include "gppx/errors.hpp"
#include "gppx/synth.hpp"

#include <algorithm>
#include <numeric>

#include <doctest.h>

using namespace gppx;

namespace {

SynthSpec annual_spec() {
    SynthSpec s;
    s.n_lat = 2;
    s.n_lon = 2;
    s.n_months = 120;
    const std::size_t n = s.n_cells();
    s.cell_area.assign(n, 1e10);
    s.land_frac.assign(n, 1.0);
    s.base.assign(n, 5e-5);
    s.trend_linear.assign(n, 0.0);
    s.trend_quadratic.assign(n, 0.0);
    s.annual_amplitude.assign(n, 2e-5);
    s.semiannual_amplitude.assign(n, 0.0);
    s.annual_phase.assign(n, 0.0);
    s.noise_std.assign(n, 0.0);
    return s;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("noise-free annual cycle is exactly periodic") {
    const SynthResult r = synth_generate(annual_spec(), 1);
    for (std::size_t c = 0; c < 4; ++c) {
        const auto s = r.grid.cell_series(c);
        for (std::size_t t = 12; t < s.size(); ++t) CHECK(s[t] == doctest::Approx(s[t - 12]).epsilon(1e-12));
    }
    CHECK(r.truth.empty());
}

TEST_CASE("injected 60% suppression produces the three most negative anomalies") {
    SynthSpec spec = annual_spec();
    spec.events.push_back({2, 50, 3, 0.6});
    const SynthResult r = synth_generate(spec, 1);
    REQUIRE(r.truth.size() == 3);

    // Oracle: deviation from the median of the same calendar month.
    const auto s = r.grid.cell_series(2);
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t t = 0; t < s.size(); ++t) {
        std::vector<double> same;
        for (std::size_t u = t % 12; u < s.size(); u += 12) same.push_back(s[u]);
        std::nth_element(same.begin(), same.begin() + static_cast<long>(same.size() / 2), same.end());
        ranked.emplace_back(s[t] - same[same.size() / 2], t);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::size_t> lowest{ranked[0].second, ranked[1].second, ranked[2].second};
    std::sort(lowest.begin(), lowest.end());
    CHECK(lowest == std::vector<std::size_t>{50, 51, 52});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(r.truth[i] == TruthLabel{2, 50 + i, 0});
    }
}

TEST_CASE("suppression scales the affected months by 1 - s") {
    SynthSpec spec = annual_spec();
    spec.events.push_back({1, 30, 2, 0.25});
    const SynthResult clean = synth_generate(annual_spec(), 9);
    const SynthResult hit = synth_generate(spec, 9);
    CHECK(hit.grid.flux(1, 30) == doctest::Approx(0.75 * clean.grid.flux(1, 30)).epsilon(1e-14));
    CHECK(hit.grid.flux(1, 31) == doctest::Approx(0.75 * clean.grid.flux(1, 31)).epsilon(1e-14));
    CHECK(hit.grid.flux(1, 32) == clean.grid.flux(1, 32));
    CHECK(hit.grid.flux(0, 30) == clean.grid.flux(0, 30));
}

TEST_CASE("same seed reproduces the grid exactly, other seeds differ") {
    SynthSpec spec = annual_spec();
    spec.noise_std.assign(4, 3e-6);
    spec.events.push_back({0, 40, 3, 0.3});
    const SynthResult a = synth_generate(spec, 123);
    const SynthResult b = synth_generate(spec, 123);
    const SynthResult c = synth_generate(spec, 124);
    CHECK(a.grid.values == b.grid.values);
    CHECK(a.truth == b.truth);
    CHECK(a.grid.values != c.grid.values);
}

TEST_CASE("flux is clamped at zero") {
    SynthSpec spec = annual_spec();
    spec.base.assign(4, 0.0);
    const SynthResult r = synth_generate(spec, 2);
    for (double v : r.grid.values) CHECK(v >= 0.0);
}

TEST_CASE("event outside the series is a spec error naming the event") {
    SynthSpec spec = annual_spec();
    spec.events.push_back({0, 10, 3, 0.3});
    spec.events.push_back({0, 118, 3, 0.3});
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("synth.events[1]"), SpecError);
    CHECK_THROWS_AS(synth_generate(spec, 1), SpecError);

    SynthSpec bad_cell = annual_spec();
    bad_cell.events.push_back({4, 10, 3, 0.3});
    CHECK_THROWS_WITH_AS(bad_cell.validate(), doctest::Contains("synth.events[0]"), SpecError);
}

TEST_CASE("json accepts scalars or per-cell arrays and round-trips") {
    const nlohmann::json doc = {
        {"n_lat", 1},       {"n_lon", 2},
        {"n_months", 48},   {"start_year", 1950},
        {"base", {1e-5, 2e-5}}, {"noise_std", 1e-6},
        {"events", {{{"cell", 1}, {"start", 5}, {"length", 3}, {"suppression", 0.4}}}},
    };
    const SynthSpec spec = synth_spec_from_json(doc);
    CHECK(spec.base == std::vector<double>{1e-5, 2e-5});
    CHECK(spec.noise_std == std::vector<double>{1e-6, 1e-6});
    CHECK(spec.calendar.start_year == 1950);
    REQUIRE(spec.events.size() == 1);
    CHECK(spec.events[0].suppression == 0.4);

    const SynthSpec back = synth_spec_from_json(synth_spec_to_json(spec));
    CHECK(back.base == spec.base);
    CHECK(back.noise_std == spec.noise_std);
    CHECK(back.n_months == 48);
    CHECK(back.events.size() == 1);

    CHECK_THROWS_WITH_AS(synth_spec_from_json({{"n_lat", 1}, {"n_lon", 2}, {"base", {1.0, 2.0, 3.0}}}),
                         doctest::Contains("base"), SpecError);
}

TEST_CASE("truth labels are sorted by cell then month") {
    SynthSpec spec = annual_spec();
    spec.events.push_back({3, 20, 2, 0.5});
    spec.events.push_back({0, 60, 3, 0.5});
    spec.events.push_back({3, 5, 1, 0.5});
    const auto truth = synth_generate(spec, 0).truth;
    CHECK(truth.size() == 6);
    CHECK(std::is_sorted(truth.begin(), truth.end(), [](const TruthLabel& a, const TruthLabel& b) {
        return std::pair(a.cell, a.month) < std::pair(b.cell, b.month);
    }));
}

}  // TEST_SUITE
