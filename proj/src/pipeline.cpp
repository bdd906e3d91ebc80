#include "gppx/pipeline.hpp"

#include "gppx/errors.hpp"
#include "gppx/grid_io.hpp"
#include "gppx/rng.hpp"
#include "gppx/ssa.hpp"
#include "gppx/svg.hpp"
#include "gppx/synth.hpp"
#include "gppx/vae.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <optional>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace gppx::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError(fmt::format("cannot create directory {}: {}", dir.string(), ec.message()));
}

/// Records each written file so the summary lists them in order.
class Writer {
public:
    void text(const fs::path& path, std::string_view content) {
        ensure_dir(path.parent_path());
        write_text(path, content);
        add(path);
    }
    void grid(const GridSeries& g, const fs::path& stem) {
        ensure_dir(stem.parent_path());
        save_grid(g, stem, GridFormat::flat_binary);
        add(header_path(stem));
        add(payload_path(stem));
    }
    void add(const fs::path& path) {
        std::lock_guard lock(mutex_);
        files_.push_back(path);
    }
    std::vector<fs::path> take() { return std::move(files_); }

private:
    std::mutex mutex_;
    std::vector<fs::path> files_;
};

std::string month_label(const Calendar& cal, std::size_t m) {
    const MonthStamp s = cal.at(m);
    return fmt::format("{}-{:02}", s.year, s.month);
}

std::string join_sizes(const std::vector<std::size_t>& v, const char* sep) {
    return fmt::format("{}", fmt::join(v, sep));
}

json train_report_json(const Job& job, const vae::TrainReport& r, const vae::Architecture& arch,
                       const vae::TrainConfig& cfg) {
    return {
        {"region", job.mask.name},
        {"period", job.period.label()},
        {"seed", r.seed},
        {"epochs_run", r.epochs_run()},
        {"best_epoch", r.best_epoch},
        {"best_val_loss", r.best_val_loss},
        {"early_stopped", r.early_stopped},
        {"architecture",
         {{"window", arch.window},
          {"hidden", arch.hidden},
          {"latent_dim", arch.latent_dim},
          {"dropout", arch.dropout},
          {"beta", arch.beta},
          {"recon_reduction", vae::to_string(arch.recon_reduction)}}},
        {"train",
         {{"max_epochs", cfg.max_epochs},
          {"early_stop_patience", cfg.early_stop_patience},
          {"plateau_patience", cfg.plateau_patience},
          {"plateau_factor", cfg.plateau_factor},
          {"learning_rate", cfg.learning_rate},
          {"batch_size", cfg.batch_size},
          {"validation_fraction", cfg.validation_fraction}}},
        {"history",
         {{"train_loss", r.train_loss},
          {"val_loss", r.val_loss},
          {"val_recon", r.val_recon},
          {"val_kl", r.val_kl},
          {"val_mse", r.val_mse},
          {"learning_rate", r.learning_rate}}},
    };
}

std::string loss_svg(const Job& job, const vae::TrainReport& r) {
    svg::LineChart chart;
    chart.title = fmt::format("{} {} VAE training loss", job.mask.name, job.period.label());
    chart.x_label = "epoch";
    chart.y_label = "loss (normalized units)";
    chart.log_y = true;
    std::vector<double> epochs(r.epochs_run());
    for (std::size_t i = 0; i < epochs.size(); ++i) epochs[i] = static_cast<double>(i + 1);
    chart.series.push_back({"training", r.train_loss, epochs, "#1f77b4"});
    chart.series.push_back({"validation", r.val_loss, epochs, "#d62728"});
    return svg::render_line_chart(chart);
}

std::vector<double> month_axis(const extremes::ExtremeFlags& f) {
    std::vector<double> x;
    for (std::size_t m = f.valid_begin; m < f.valid_end; ++m) {
        const MonthStamp s = f.calendar.at(m);
        x.push_back(s.year + (s.month - 1) / 12.0);
    }
    return x;
}

template <class T>
std::vector<double> valid_slice(const std::vector<T>& v, const extremes::ExtremeFlags& f) {
    return {v.begin() + static_cast<std::ptrdiff_t>(f.valid_begin), v.begin() + static_cast<std::ptrdiff_t>(f.valid_end)};
}

std::string series_svg(const Job& job, Method method, const extremes::ExtremesReport& r, bool magnitude) {
    svg::LineChart chart;
    chart.title = fmt::format("{} {} {} extremes", job.mask.name, job.period.label(), to_string(method));
    chart.x_label = "year";
    chart.y_label = magnitude ? "extreme magnitude (TgC)" : "extreme events (events/month)";
    const auto x = month_axis(r.flags);
    if (magnitude) {
        chart.series.push_back({"negative", valid_slice(r.negative.magnitude_tgc, r.flags), x, "#b2182b"});
        chart.series.push_back({"positive", valid_slice(r.positive.magnitude_tgc, r.flags), x, "#2166ac"});
    } else {
        chart.series.push_back({"negative", valid_slice(r.negative.count, r.flags), x, "#b2182b"});
        chart.series.push_back({"positive", valid_slice(r.positive.count, r.flags), x, "#2166ac"});
    }
    return svg::render_line_chart(chart);
}

std::string frequency_svg(const Job& job, Method method, const GridSeries& grid, const extremes::ExtremesReport& r,
                          extremes::Sign sign) {
    svg::HeatMap map;
    const bool neg = sign == extremes::Sign::negative;
    map.title = fmt::format("{} {} {} {} extremes", job.mask.name, job.period.label(), to_string(method),
                            neg ? "negative" : "positive");
    map.legend_label = "events per cell";
    map.n_rows = grid.n_lat;
    map.n_cols = grid.n_lon;
    map.values.assign(grid.n_cells(), std::nullopt);
    const auto& freq = neg ? r.freq_negative : r.freq_positive;
    for (std::size_t row = 0; row < r.flags.cells.size(); ++row) {
        map.values[r.flags.cells[row]] = static_cast<double>(freq[row]);
    }
    map.color_high = svg::region_color(job.region_index);
    map.min = 0.0;
    return svg::render_heat_map(map);
}

/// Month 0 holds negative counts, month 1 positive counts; cells outside the
/// region are zero.
GridSeries frequency_grid(const GridSeries& grid, const Job& job, const extremes::ExtremesReport& r) {
    GridSeries g;
    g.n_lat = grid.n_lat;
    g.n_lon = grid.n_lon;
    g.n_months = 2;
    g.calendar = {job.period.start_year, 1};
    g.values.assign(grid.n_cells() * 2, 0.0);
    g.cell_area = grid.cell_area;
    g.land_frac = grid.land_frac;
    for (std::size_t row = 0; row < r.flags.cells.size(); ++row) {
        const std::size_t c = r.flags.cells[row];
        g.values[c * 2] = static_cast<double>(r.freq_negative[row]);
        g.values[c * 2 + 1] = static_cast<double>(r.freq_positive[row]);
    }
    return g;
}

json cumulative_json(const Job& job, Method method, const extremes::ExtremesReport& r) {
    const extremes::CumulativeTotals t = extremes::cumulative_totals(r);
    return {
        {"region", job.mask.name},
        {"period", job.period.label()},
        {"method", std::string(to_string(method))},
        {"valid_months", r.flags.valid_end - r.flags.valid_begin},
        {"first_valid_month", month_label(r.flags.calendar, r.flags.valid_begin)},
        {"last_valid_month", month_label(r.flags.calendar, r.flags.valid_end - 1)},
        {"negative_events", r.flags.count(extremes::Sign::negative)},
        {"positive_events", r.flags.count(extremes::Sign::positive)},
        {"negative_TgC", t.negative_tgc},
        {"positive_TgC", t.positive_tgc},
    };
}

void write_job_extremes(Writer& w, const RunConfig& config, const GridSeries& grid, const Job& job, Method method,
                        const extremes::ExtremesReport& r) {
    const fs::path dir = config.output_dir / "extremes";
    const std::string base = fmt::format("{}_{}", job.stem(), to_string(method));
    w.text(dir / (base + "_frequency.csv"), extremes::frequency_map_csv(r, grid.n_lon));
    w.text(dir / (base + "_frequency_negative.svg"), frequency_svg(job, method, grid, r, extremes::Sign::negative));
    w.text(dir / (base + "_frequency_positive.svg"), frequency_svg(job, method, grid, r, extremes::Sign::positive));
    w.grid(frequency_grid(grid, job, r), dir / (base + "_frequency_grid"));
    w.text(dir / (base + "_series.csv"), extremes::regional_series_csv(r));
    w.text(dir / (base + "_magnitude.svg"), series_svg(job, method, r, true));
    w.text(dir / (base + "_counts.svg"), series_svg(job, method, r, false));
    w.text(dir / (base + "_flags.csv"), extremes::flags_csv(r));
    w.text(dir / (base + "_cumulative.json"), cumulative_json(job, method, r).dump(2) + "\n");
}

void write_comparison(Writer& w, const RunConfig& config, const std::vector<compare::AgreementStats>& stats) {
    const auto rows = compare::threshold_table(stats);
    w.text(config.output_dir / "agreement.csv", compare::agreement_csv(stats));
    w.text(config.output_dir / "agreement.json", compare::agreement_json(stats).dump(2) + "\n");
    w.text(config.output_dir / "threshold_table.md", compare::threshold_table_text(rows));
    w.text(config.output_dir / "threshold_table.csv", compare::threshold_table_csv(rows));
}

std::string files_message(const std::string& head, const std::vector<fs::path>& files) {
    return fmt::format("{}; {} files written", head, files.size());
}

}  // namespace

std::string Job::stem() const { return fmt::format("{}_{}", mask.name, period.slug()); }

GridSeries load_input(const RunConfig& config) {
    GridSeries grid;
    if (config.grid_path) {
        grid = load_grid(*config.grid_path, config.grid_format);
    } else {
        grid = synth_generate(*config.synth, config.seed).grid;
    }
    grid.validate();
    config.validate_against(grid);
    return grid;
}

std::vector<Job> make_jobs(const RunConfig& config, const GridSeries& grid) {
    std::vector<Job> jobs;
    for (std::size_t r = 0; r < config.regions.size(); ++r) {
        const RegionMask mask = config.regions[r].resolve(grid);
        for (const Period& p : config.periods) {
            Job j;
            j.index = jobs.size();
            j.region_index = r;
            j.mask = mask;
            j.period = p;
            jobs.push_back(std::move(j));
        }
    }
    return jobs;
}

std::uint64_t job_seed(const RunConfig& config, const Job& job) { return Rng::derive(config.seed, job.index); }

MassSeries job_mass(const GridSeries& grid, const Job& job) {
    return flux_to_mass(grid.slice_period(job.period), job.mask);
}

fs::path checkpoint_stem(const RunConfig& config, const Job& job) {
    return config.output_dir / "checkpoints" / job.stem();
}

void run_parallel(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& task) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t count = std::max<std::size_t>(1, std::min(threads, n));
    if (count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

extremes::ExtremesReport job_report(const RunConfig& config, const GridSeries& grid, const Job& job, Method method) {
    const MassSeries mass = job_mass(grid, job);
    AnomalyField anomalies;
    if (method == Method::ssa) {
        anomalies = ssa::ssa_anomalies(mass, config.ssa);
    } else {
        const fs::path stem = checkpoint_stem(config, job);
        if (!fs::exists(header_path(stem))) {
            throw DataError(fmt::format("no VAE checkpoint for {} at {}; run `gppx train --config <config>` first",
                                        job.stem(), header_path(stem).string()));
        }
        const vae::VaeModel model = vae::load_checkpoint(stem);
        anomalies = vae::vae_anomalies(mass, vae::reconstruct(model, mass));
    }
    return extremes::build_report(anomalies, job.mask, job.period, config.threshold_mode);
}

Summary cmd_synth(const RunConfig& config) {
    if (!config.synth) throw ConfigError("synth: the config has no input.synth spec");
    const SynthSpec& spec = *config.synth;
    const SynthResult result = synth_generate(spec, config.seed);
    Writer w;
    w.grid(result.grid, config.output_dir / "grid");
    std::string truth = "cell,lat,lon,month,month_index,event\n";
    for (const TruthLabel& t : result.truth) {
        truth += fmt::format("{},{},{},{},{},{}\n", t.cell, t.cell / spec.n_lon, t.cell % spec.n_lon,
                             month_label(spec.calendar, t.month), t.month, t.event);
    }
    w.text(config.output_dir / "truth.csv", truth);
    w.text(config.output_dir / "synth_spec.json", synth_spec_to_json(spec).dump(2) + "\n");
    Summary s;
    s.files = w.take();
    s.message = files_message(fmt::format("synthetic grid {}x{}x{} with {} events ({} labelled samples)", spec.n_lat,
                                          spec.n_lon, spec.n_months, spec.events.size(), result.truth.size()),
                              s.files);
    return s;
}

Summary cmd_train(const RunConfig& config) {
    const GridSeries grid = load_input(config);
    const std::vector<Job> jobs = make_jobs(config, grid);
    std::vector<vae::TrainReport> reports(jobs.size());
    Writer w;
    run_parallel(jobs.size(), config.jobs, [&](std::size_t i) {
        const Job& job = jobs[i];
        const auto [windows, norm] = vae::normalize(job_mass(grid, job));
        vae::TrainConfig cfg = config.vae_train;
        cfg.seed = job_seed(config, job);
        const vae::TrainResult result = vae::train(windows, norm, config.vae_arch, cfg);
        const fs::path stem = checkpoint_stem(config, job);
        ensure_dir(stem.parent_path());
        vae::save_checkpoint(result.model, {cfg.seed, result.report.best_epoch}, stem);
        w.add(header_path(stem));
        w.add(payload_path(stem));
        const fs::path dir = config.output_dir / "train";
        w.text(dir / (job.stem() + "_report.json"),
               train_report_json(job, result.report, config.vae_arch, cfg).dump(2) + "\n");
        w.text(dir / (job.stem() + "_loss.svg"), loss_svg(job, result.report));
        reports[i] = result.report;
    });
    std::string message = fmt::format("trained {} model(s)", jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        message += fmt::format("\n  {}: best epoch {} of {}, validation loss {:.6g}", jobs[i].stem(),
                               reports[i].best_epoch, reports[i].epochs_run(), reports[i].best_val_loss);
    }
    Summary s;
    s.files = w.take();
    std::sort(s.files.begin(), s.files.end());
    s.message = files_message(message, s.files);
    return s;
}

namespace {

/// Reports for every (job, method) pair, job-major.
std::vector<extremes::ExtremesReport> all_reports(const RunConfig& config, const GridSeries& grid,
                                                  const std::vector<Job>& jobs, const std::vector<Method>& methods) {
    std::vector<extremes::ExtremesReport> reports(jobs.size() * methods.size());
    run_parallel(reports.size(), config.jobs, [&](std::size_t k) {
        reports[k] = job_report(config, grid, jobs[k / methods.size()], methods[k % methods.size()]);
    });
    return reports;
}

std::vector<compare::AgreementStats> agreement(const std::vector<Job>& jobs,
                                               const std::vector<extremes::ExtremesReport>& reports) {
    std::vector<compare::AgreementStats> stats;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        stats.push_back(compare::compare_methods(reports[2 * j], reports[2 * j + 1]));
    }
    return stats;
}

}  // namespace

Summary cmd_extremes(const RunConfig& config) {
    const GridSeries grid = load_input(config);
    const std::vector<Job> jobs = make_jobs(config, grid);
    const std::vector<Method> methods = methods_of(config.method);
    const auto reports = all_reports(config, grid, jobs, methods);

    Writer w;
    run_parallel(reports.size(), config.jobs, [&](std::size_t k) {
        write_job_extremes(w, config, grid, jobs[k / methods.size()], methods[k % methods.size()], reports[k]);
    });
    std::vector<extremes::ThresholdSet> thresholds;
    for (const auto& r : reports) thresholds.push_back(r.thresholds);
    w.text(config.output_dir / "thresholds.csv", extremes::thresholds_csv(thresholds));
    if (config.method == MethodSelection::both) write_comparison(w, config, agreement(jobs, reports));

    Summary s;
    s.files = w.take();
    std::sort(s.files.begin(), s.files.end());
    std::string message = fmt::format("extremes for {} job(s) x {} method(s)", jobs.size(), methods.size());
    for (const auto& t : thresholds) {
        message += fmt::format("\n  {} {} {}: q_neg {:.6g} GgC, q_pos {:.6g} GgC", t.region, t.period.label(),
                               to_string(t.method), t.q_neg, t.q_pos);
    }
    s.message = files_message(message, s.files);
    return s;
}

Summary cmd_gridsearch(const RunConfig& config) {
    const GridSeries grid = load_input(config);
    const std::vector<Job> jobs = make_jobs(config, grid);
    std::vector<vae::SearchResult> results(jobs.size());
    Writer w;
    run_parallel(jobs.size(), config.jobs, [&](std::size_t i) {
        const Job& job = jobs[i];
        const auto [windows, norm] = vae::normalize(job_mass(grid, job));
        vae::TrainConfig cfg = config.vae_train;
        cfg.seed = job_seed(config, job);
        results[i] = vae::grid_search(windows, norm, config.vae_arch, cfg, config.search);
        std::string csv = "trial,latent_dim,hidden,learning_rate,best_epoch,best_val_loss,best\n";
        for (const vae::Trial& t : results[i].trials) {
            csv += fmt::format("{},{},{},{},{},{},{}\n", t.index, t.latent_dim, join_sizes(t.hidden, "-"),
                               t.learning_rate, t.best_epoch, t.best_val_loss, t.index == results[i].best ? 1 : 0);
        }
        w.text(config.output_dir / "gridsearch" / (job.stem() + ".csv"), csv);
    });
    std::string message = fmt::format("grid search over {} trial(s) for {} job(s)", config.search.trial_count(),
                                      jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const vae::Trial& best = results[i].trials[results[i].best];
        message += fmt::format("\n  {}: best trial {} (latent {}, hidden {}, lr {}) validation loss {:.6g}",
                               jobs[i].stem(), best.index, best.latent_dim, join_sizes(best.hidden, "-"),
                               best.learning_rate, best.best_val_loss);
    }
    Summary s;
    s.files = w.take();
    std::sort(s.files.begin(), s.files.end());
    s.message = files_message(message, s.files);
    return s;
}

Summary cmd_compare(const RunConfig& config) {
    const GridSeries grid = load_input(config);
    const std::vector<Job> jobs = make_jobs(config, grid);
    const auto reports = all_reports(config, grid, jobs, {Method::vae, Method::ssa});
    const auto stats = agreement(jobs, reports);
    Writer w;
    write_comparison(w, config, stats);
    Summary s;
    s.files = w.take();
    s.message = compare::threshold_table_text(compare::threshold_table(stats));
    s.message += files_message("comparison", s.files);
    return s;
}

}  // namespace gppx::pipeline
