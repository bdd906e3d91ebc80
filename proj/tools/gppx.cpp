// gppx: GPP extremes from gridded monthly flux.
//
//   gppx <synth|train|extremes|gridsearch|compare> --config run.json
//        [--out DIR] [--seed N] [--jobs N]
//
// Exit status: 0 success, 1 usage or config error, 2 data error,
// 3 numerical failure.

#include "gppx/config.hpp"
#include "gppx/errors.hpp"
#include "gppx/pipeline.hpp"

#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

namespace {

struct GlobalFlags {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
};

int fail(gppx::ExitCode code, const std::string& message) {
    fmt::print(stderr, "gppx: {}\n", message);
    return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GPP extremes from gridded monthly flux"};
    app.require_subcommand(1);

    GlobalFlags flags;
    using Command = std::function<gppx::pipeline::Summary(const gppx::RunConfig&)>;
    const std::map<std::string, std::pair<std::string, Command>> commands{
        {"synth", {"generate a synthetic grid and ground-truth labels", gppx::pipeline::cmd_synth}},
        {"train", {"train one VAE per region and period", gppx::pipeline::cmd_train}},
        {"extremes", {"compute anomalies, thresholds, flags and figures", gppx::pipeline::cmd_extremes}},
        {"gridsearch", {"search VAE hyperparameters", gppx::pipeline::cmd_gridsearch}},
        {"compare", {"compare VAE and SSA extremes", gppx::pipeline::cmd_compare}},
    };
    for (const auto& [name, entry] : commands) {
        CLI::App* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", flags.config, "run configuration (JSON)")->required();
        sub->add_option("--out", flags.out, "output directory, overrides output_dir");
        sub->add_option("--seed", flags.seed, "random seed, overrides seed");
        sub->add_option("--jobs", flags.jobs, "parallel jobs, overrides jobs")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(gppx::ExitCode::usage);
    }

    try {
        gppx::RunConfig config = gppx::load_config(flags.config);
        if (flags.out) config.output_dir = *flags.out;
        if (flags.seed) config.seed = *flags.seed;
        if (flags.jobs) config.jobs = *flags.jobs;
        config.validate();

        const std::string name = app.get_subcommands().front()->get_name();
        const gppx::pipeline::Summary summary = commands.at(name).second(config);
        fmt::print("{}\n", summary.message);
        return 0;
    } catch (const gppx::Error& e) {
        return fail(e.exit_code(), e.what());
    } catch (const std::exception& e) {
        return fail(gppx::ExitCode::data, e.what());
    }
}
