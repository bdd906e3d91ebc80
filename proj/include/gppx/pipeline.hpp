#pragma once

// Subcommand implementations. Every command reads one RunConfig and writes
// under its output directory:
//
//   synth       grid.json, grid.f64, truth.csv, synth_spec.json
//   train       checkpoints/<job>.{json,f64}, train/<job>_report.json, train/<job>_loss.svg
//   extremes    thresholds.csv, extremes/<job>_<method>_*.{csv,svg,json,f64}
//               plus the compare outputs when both methods run
//   gridsearch  gridsearch/<job>.csv
//   compare     agreement.csv, agreement.json, threshold_table.md, threshold_table.csv
//
// <job> is "<region>_<start>-<end>", e.g. "WNA_1850-1880". Jobs are ordered
// region-major, period-minor, and every merged table keeps that order.

#include "gppx/compare.hpp"
#include "gppx/config.hpp"
#include "gppx/extremes.hpp"
#include "gppx/grid.hpp"

#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace gppx::pipeline {

struct Job {
    std::size_t index = 0;
    std::size_t region_index = 0;
    RegionMask mask;
    Period period;

    std::string stem() const;
};

/// The configured grid file, or the synthetic grid generated from the
/// config seed. Validates the config against it.
GridSeries load_input(const RunConfig& config);

std::vector<Job> make_jobs(const RunConfig& config, const GridSeries& grid);

/// Per-job seed for training and search.
std::uint64_t job_seed(const RunConfig& config, const Job& job);

/// Effective-cell mass of the job's region over the job's period.
MassSeries job_mass(const GridSeries& grid, const Job& job);

std::filesystem::path checkpoint_stem(const RunConfig& config, const Job& job);

/// Runs task(0) .. task(n - 1) on up to `threads` workers. If tasks throw,
/// the exception of the lowest-numbered failing task is rethrown.
void run_parallel(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& task);

/// Anomalies and extremes of one job for one method. VAE jobs need the
/// checkpoint written by `train`; its absence raises DataError.
extremes::ExtremesReport job_report(const RunConfig& config, const GridSeries& grid, const Job& job, Method method);

struct Summary {
    std::vector<std::filesystem::path> files;  // in write order
    std::string message;
};

Summary cmd_synth(const RunConfig& config);
Summary cmd_train(const RunConfig& config);
Summary cmd_extremes(const RunConfig& config);
Summary cmd_gridsearch(const RunConfig& config);
Summary cmd_compare(const RunConfig& config);

}  // namespace gppx::pipeline
