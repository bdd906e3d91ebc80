#pragma once

#include "gppx/extremes.hpp"
#include "gppx/grid.hpp"
#include "gppx/grid_io.hpp"
#include "gppx/ssa.hpp"
#include "gppx/synth.hpp"
#include "gppx/vae.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gppx {

inline constexpr int kConfigSchemaVersion = 1;

enum class MethodSelection { vae, ssa, both };

const char* to_string(MethodSelection m);
MethodSelection parse_method_selection(const std::string& name);
std::vector<Method> methods_of(MethodSelection m);

/// A region given either as explicit cells or as an inclusive lat/lon box.
struct RegionSpec {
    std::string name;
    std::vector<std::size_t> cells;
    struct Box {
        std::size_t lat_first = 0, lat_last = 0;
        std::size_t lon_first = 0, lon_last = 0;
    };
    std::optional<Box> box;
    double min_land_frac = 0.10;

    /// Throws ConfigError when the region does not fit `grid`.
    RegionMask resolve(const GridSeries& grid) const;
};

/// One JSON document drives every subcommand.
///
/// Relative paths inside the document resolve against `base_dir`, the
/// directory holding the config file.
struct RunConfig {
    int schema_version = kConfigSchemaVersion;
    std::filesystem::path base_dir = ".";

    std::optional<std::filesystem::path> grid_path;
    GridFormat grid_format = GridFormat::flat_binary;
    std::optional<SynthSpec> synth;

    std::vector<RegionSpec> regions;
    std::vector<Period> periods;
    MethodSelection method = MethodSelection::both;

    vae::Architecture vae_arch;
    vae::TrainConfig vae_train;
    vae::SearchSpace search;
    ssa::SsaConfig ssa;
    extremes::ThresholdMode threshold_mode = extremes::ThresholdMode::two_sided;

    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    std::size_t jobs = 1;

    /// Structural checks that need no data. Throws ConfigError.
    void validate() const;

    /// Periods lie inside the grid's span and every region resolves.
    void validate_against(const GridSeries& grid) const;
};

RunConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace gppx
