#include "generators.hpp"

#include "gppx/config.hpp"
#include "gppx/errors.hpp"

#include <string>

#include <doctest.h>

using namespace gppx;
using nlohmann::json;

namespace {

json minimal_doc() {
    return json::parse(R"({
        "schema_version": 1,
        "input": {"synth": {"n_lat": 2, "n_lon": 2, "n_months": 372}},
        "regions": [{"name": "R", "cells": [0, 1, 2, 3]}],
        "periods": [[1850, 1880]]
    })");
}

std::string error_of(const json& doc) {
    try {
        config_from_json(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("minimal document takes defaults") {
    const RunConfig c = config_from_json(minimal_doc());
    CHECK(c.method == MethodSelection::both);
    CHECK(c.vae_arch.latent_dim == 5);
    CHECK(c.vae_arch.beta == 0.5);
    CHECK(c.threshold_mode == extremes::ThresholdMode::two_sided);
    CHECK(c.seed == 0);
    CHECK(c.jobs == 1);
    REQUIRE(c.synth);
    CHECK(c.synth->n_cells() == 4);
    REQUIRE(c.periods.size() == 1);
    CHECK(c.periods[0] == Period{1850, 1880});
}

TEST_CASE("full document fields") {
    json doc = minimal_doc();
    doc["method"] = "ssa";
    doc["seed"] = 7;
    doc["jobs"] = 2;
    doc["vae"] = {{"hidden", {16, 8}}, {"latent_dim", 3}, {"beta", 0.25}, {"max_epochs", 40},
                  {"learning_rate", 0.002}, {"recon_reduction", "mean"}};
    doc["ssa"] = {{"window", 48}};
    doc["extremes"] = {{"threshold_mode", "absolute"}};
    const RunConfig c = config_from_json(doc);
    CHECK(c.method == MethodSelection::ssa);
    CHECK(methods_of(c.method) == std::vector<Method>{Method::ssa});
    CHECK(c.seed == 7);
    CHECK(c.jobs == 2);
    CHECK(c.vae_arch.hidden == std::vector<std::size_t>{16, 8});
    CHECK(c.vae_arch.latent_dim == 3);
    CHECK(c.vae_arch.beta == 0.25);
    CHECK(c.vae_arch.recon_reduction == vae::ReconReduction::mean);
    CHECK(c.vae_train.max_epochs == 40);
    CHECK(c.vae_train.learning_rate == 0.002);
    CHECK(c.ssa.window == 48);
    CHECK(c.threshold_mode == extremes::ThresholdMode::absolute);
}

TEST_CASE("search axes default to the configured model") {
    json doc = minimal_doc();
    doc["vae"] = {{"hidden", {16, 8}}, {"latent_dim", 3}, {"learning_rate", 0.002}};
    RunConfig c = config_from_json(doc);
    CHECK(c.search.trial_count() == 1);
    CHECK(c.search.latent_dims == std::vector<std::size_t>{3});
    CHECK(c.search.learning_rates == std::vector<double>{0.002});
    REQUIRE(c.search.hidden.size() == 1);
    CHECK(c.search.hidden[0] == std::vector<std::size_t>{16, 8});

    doc["gridsearch"] = {{"learning_rates", {0.01, 0.001}}, {"hidden", {{8}, {16, 8}}}};
    c = config_from_json(doc);
    CHECK(c.search.trial_count() == 4);
    CHECK(c.search.latent_dims == std::vector<std::size_t>{3});
}

TEST_CASE("relative paths resolve against the config directory") {
    json doc = minimal_doc();
    doc["input"] = {{"grid", "data/grid"}, {"format", "csv"}};
    doc["output_dir"] = "results";
    const RunConfig c = config_from_json(doc, "/tmp/run");
    REQUIRE(c.grid_path);
    CHECK(*c.grid_path == std::filesystem::path("/tmp/run/data/grid"));
    CHECK(c.grid_format == GridFormat::csv);
    CHECK(c.output_dir == std::filesystem::path("/tmp/run/results"));
}

TEST_CASE("both period syntaxes") {
    json doc = minimal_doc();
    doc["periods"] = json::parse(R"([[1850, 1880], {"start": 1860, "end": 1870}])");
    const RunConfig c = config_from_json(doc);
    REQUIRE(c.periods.size() == 2);
    CHECK(c.periods[1] == Period{1860, 1870});

    doc["periods"] = json::parse(R"([[1850]])");
    CHECK(error_of(doc).find("periods[0]") != std::string::npos);
    doc["periods"] = json::parse(R"([[1880, 1850]])");
    CHECK(error_of(doc).find("periods[0]") != std::string::npos);
    doc["periods"] = json::parse(R"([[1850, 1880], [1850, 1880]])");
    CHECK(error_of(doc).find("duplicate") != std::string::npos);
}

TEST_CASE("unknown keys are rejected with their path") {
    json doc = minimal_doc();
    doc["colour"] = "blue";
    CHECK(error_of(doc).find("unknown key 'colour'") != std::string::npos);
    doc = minimal_doc();
    doc["vae"] = {{"epochs", 10}};
    CHECK(error_of(doc).find("vae: unknown key 'epochs'") != std::string::npos);
    doc = minimal_doc();
    doc["regions"][0]["land"] = 0.5;
    CHECK(error_of(doc).find("regions[0]: unknown key 'land'") != std::string::npos);
}

TEST_CASE("structural errors") {
    json doc = minimal_doc();
    doc["schema_version"] = 2;
    CHECK(error_of(doc).find("schema_version") != std::string::npos);

    doc = minimal_doc();
    doc.erase("schema_version");
    CHECK(error_of(doc).find("schema_version") != std::string::npos);

    doc = minimal_doc();
    doc.erase("input");
    CHECK(error_of(doc).find("input") != std::string::npos);

    doc = minimal_doc();
    doc["input"]["grid"] = "x";
    CHECK(error_of(doc).find("not both") != std::string::npos);

    doc = minimal_doc();
    doc["regions"] = json::array();
    CHECK(error_of(doc).find("regions") != std::string::npos);

    doc = minimal_doc();
    doc["method"] = "pca";
    CHECK(error_of(doc).find("pca") != std::string::npos);

    doc = minimal_doc();
    doc["seed"] = -1;
    CHECK(error_of(doc).find("seed") != std::string::npos);

    doc = minimal_doc();
    doc["jobs"] = 0;
    CHECK(error_of(doc).find("jobs") != std::string::npos);

    doc = minimal_doc();
    doc["vae"] = {{"max_epochs", "many"}};
    CHECK(error_of(doc).find("vae.max_epochs") != std::string::npos);

    doc = minimal_doc();
    doc["gridsearch"] = {{"learning_rates", {0.1, 0.01, 0.001}}, {"latent_dims", {1, 2, 3, 4, 5, 6, 7}}};
    CHECK(error_of(doc).find("21 trials") != std::string::npos);
}

TEST_CASE("region names and shapes") {
    for (const char* bad : {"", "W NA", "a/b", "a.b", "a,b", "a|b"}) {
        json doc = minimal_doc();
        doc["regions"][0]["name"] = bad;
        CHECK(error_of(doc).find("regions[0].name") != std::string::npos);
    }
    json doc = minimal_doc();
    doc["regions"].push_back({{"name", "R"}, {"cells", {0}}});
    CHECK(error_of(doc).find("duplicate name 'R'") != std::string::npos);

    doc = minimal_doc();
    doc["regions"][0] = {{"name", "B"}, {"lat", {0, 1}}};
    CHECK(error_of(doc).find("regions[0]") != std::string::npos);
    doc["regions"][0] = {{"name", "B"}, {"lat", {1, 0}}, {"lon", {0, 1}}};
    CHECK(error_of(doc).find("regions[0].lat") != std::string::npos);
    doc["regions"][0] = {{"name", "B"}, {"cells", {0}}, {"lat", {0, 0}}, {"lon", {0, 0}}};
    CHECK(error_of(doc).find("either") != std::string::npos);
}

TEST_CASE("box regions resolve row-major") {
    Rng rng(1);
    const GridSeries g = gen::random_grid(rng, 3, 4, 36);
    RegionSpec r;
    r.name = "BOX";
    r.box = RegionSpec::Box{1, 2, 1, 2};
    r.min_land_frac = 0.0;
    const RegionMask m = r.resolve(g);
    CHECK(m.cells == std::vector<std::size_t>{5, 6, 9, 10});
    r.box = RegionSpec::Box{0, 3, 0, 0};
    CHECK_THROWS_AS(r.resolve(g), ConfigError);
}

TEST_CASE("validation against a grid") {
    Rng rng(2);
    const GridSeries g = gen::random_grid(rng, 2, 2, 372);
    RunConfig c = config_from_json(minimal_doc());
    CHECK_NOTHROW(c.validate_against(g));

    c.periods = {Period{1850, 1881}};
    try {
        c.validate_against(g);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("outside the grid span 1850-01 to 1880-12") != std::string::npos);
    }

    c = config_from_json(minimal_doc());
    c.regions[0].cells = {0, 9};
    CHECK_THROWS_AS(c.validate_against(g), ConfigError);
}

TEST_CASE("demo config loads") {
    const RunConfig c = load_config(std::filesystem::path(GPPX_CONFIG_DIR) / "demo.json");
    CHECK(c.base_dir == std::filesystem::path(GPPX_CONFIG_DIR));
    CHECK(c.regions.size() == 2);
    CHECK(c.search.trial_count() == 2);
    REQUIRE(c.synth);
    const GridSeries g = synth_generate(*c.synth, c.seed).grid;
    CHECK_NOTHROW(c.validate_against(g));
}

TEST_CASE("load_config reports unreadable and malformed files as config errors") {
    gen::TempDir dir("config");
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
    write_text(dir / "broken.json", "{\"schema_version\": 1,");
    CHECK_THROWS_AS(load_config(dir / "broken.json"), ConfigError);
}

}  // TEST_SUITE
