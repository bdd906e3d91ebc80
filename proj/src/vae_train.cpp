#include "gppx/errors.hpp"
#include "gppx/vae.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace gppx::vae {

namespace {

// Independent random streams derived from the training seed.
enum Stream : std::uint64_t { init_stream = 0, split_stream = 1, shuffle_stream = 2, dropout_stream = 3, eps_stream = 4,
               validation_stream = 5 };

Matrix gather(const Matrix& windows, std::span<const std::size_t> idx) {
    Matrix out(windows.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = windows.col(static_cast<Eigen::Index>(idx[j]));
    return out;
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    }
    return m;
}

}  // namespace

TrainResult train(const WindowSet& windows, const NormParams& norm, const Architecture& arch,
                  const TrainConfig& config) {
    arch.validate();
    config.validate();
    const std::size_t n = windows.size();
    if (static_cast<std::size_t>(windows.windows.rows()) != arch.window) {
        throw ShapeError(fmt::format("windows have length {}, architecture expects {}", windows.windows.rows(), arch.window));
    }
    if (n < config.batch_size) {
        throw ConfigError(fmt::format("{} windows is fewer than the batch size {}", n, config.batch_size));
    }
    if (n < 2) throw ConfigError("training needs at least two windows");

    TrainResult result{VaeModel(arch), {}};
    VaeModel& model = result.model;
    model.norm = norm;
    {
        Rng init_rng(Rng::derive(config.seed, init_stream));
        model.init(init_rng);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    {
        Rng split_rng(Rng::derive(config.seed, split_stream));
        split_rng.shuffle(std::span<std::size_t>(order));
    }
    auto n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    const std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    const Matrix val_batch = gather(windows.windows, val_idx);
    // One fixed draw per validation window keeps the validation loss an
    // estimate of the training objective that only moves when parameters do.
    Matrix val_eps;
    {
        Rng val_rng(Rng::derive(config.seed, validation_stream));
        val_eps = standard_normal(static_cast<Eigen::Index>(arch.latent_dim), val_batch.cols(), val_rng);
    }

    Rng shuffle_rng(Rng::derive(config.seed, shuffle_stream));
    Rng dropout_rng(Rng::derive(config.seed, dropout_stream));
    Rng eps_rng(Rng::derive(config.seed, eps_stream));

    nn::AdamState adam;
    adam.learning_rate = config.learning_rate;
    VaeGradients grads = model.make_gradients();

    TrainReport& report = result.report;
    report.seed = config.seed;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best_params;
    std::size_t since_best = 0;
    std::size_t since_plateau_check = 0;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(std::span<std::size_t>(train_idx));
        double epoch_loss = 0.0;
        std::size_t batch_no = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += config.batch_size, ++batch_no) {
            const std::size_t stop = std::min(train_idx.size(), start + config.batch_size);
            const std::span<const std::size_t> idx(train_idx.data() + start, stop - start);
            const Matrix batch = gather(windows.windows, idx);
            const Matrix eps = standard_normal(static_cast<Eigen::Index>(arch.latent_dim), batch.cols(), eps_rng);
            grads.set_zero();
            const LossParts parts = model.batch_loss(batch, eps, nn::Mode::train, &dropout_rng, &grads);
            if (!std::isfinite(parts.total)) {
                throw NumericalError(fmt::format("non-finite training loss {} at epoch {} batch {} (recon {}, kl {})",
                                                 parts.total, epoch, batch_no, parts.recon, parts.kl));
            }
            try {
                nn::adam_step(adam, model.parameters(), grads.blocks());
            } catch (const NumericalError& e) {
                throw NumericalError(fmt::format("epoch {} batch {}: {}", epoch, batch_no, e.what()));
            }
            epoch_loss += parts.total * static_cast<double>(idx.size());
        }
        if (!model.finite()) throw NumericalError(fmt::format("non-finite parameters after epoch {}", epoch));

        const LossParts val = model.batch_loss(val_batch, val_eps, nn::Mode::eval, nullptr, nullptr);
        if (!std::isfinite(val.total)) {
            throw NumericalError(fmt::format("non-finite validation loss {} at epoch {}", val.total, epoch));
        }
        report.train_loss.push_back(epoch_loss / static_cast<double>(train_idx.size()));
        report.val_loss.push_back(val.total);
        report.val_recon.push_back(val.recon);
        report.val_kl.push_back(val.kl);
        const Matrix val_rec = model.reconstruct_windows(val_batch);
        report.val_mse.push_back((val_rec - val_batch).squaredNorm() / static_cast<double>(val_batch.size()));
        report.learning_rate.push_back(adam.learning_rate);

        if (val.total < best) {
            best = val.total;
            report.best_epoch = epoch;
            report.best_val_loss = val.total;
            best_params.clear();
            for (const auto& block : model.parameters()) best_params.emplace_back(block.begin(), block.end());
            since_best = 0;
            since_plateau_check = 0;
            continue;
        }
        ++since_best;
        ++since_plateau_check;
        if (since_plateau_check >= config.plateau_patience) {
            adam.learning_rate *= config.plateau_factor;
            since_plateau_check = 0;
        }
        if (since_best >= config.early_stop_patience) {
            report.early_stopped = true;
            break;
        }
    }

    auto blocks = model.parameters();
    for (std::size_t b = 0; b < blocks.size(); ++b) std::copy(best_params[b].begin(), best_params[b].end(), blocks[b].begin());
    return result;
}

SearchResult grid_search(const WindowSet& windows, const NormParams& norm, const Architecture& base_arch,
                         const TrainConfig& base_config, const SearchSpace& space) {
    const std::size_t count = space.trial_count();
    if (count == 0) throw ConfigError("gridsearch: search space is empty");
    if (count > kMaxSearchTrials) {
        throw ConfigError(fmt::format("gridsearch: {} trials exceeds the limit of {}", count, kMaxSearchTrials));
    }
    SearchResult result;
    for (const std::size_t latent : space.latent_dims) {
        for (const auto& hidden : space.hidden) {
            for (const double lr : space.learning_rates) {
                Architecture arch = base_arch;
                arch.latent_dim = latent;
                arch.hidden = hidden;
                TrainConfig cfg = base_config;
                cfg.learning_rate = lr;
                const TrainResult run = train(windows, norm, arch, cfg);

                Trial t;
                t.index = result.trials.size();
                t.latent_dim = latent;
                t.hidden = hidden;
                t.learning_rate = lr;
                t.best_val_loss = run.report.best_val_loss;
                t.best_epoch = run.report.best_epoch;
                // Strict comparison keeps the earliest trial on ties.
                if (result.trials.empty() || t.best_val_loss < result.trials[result.best].best_val_loss) {
                    result.best = t.index;
                }
                result.trials.push_back(std::move(t));
            }
        }
    }
    return result;
}

}  // namespace gppx::vae
