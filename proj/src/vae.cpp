#include "gppx/vae.hpp"

#include "gppx/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace gppx::vae {

const char* to_string(ReconReduction r) { return r == ReconReduction::sum ? "sum" : "mean"; }

ReconReduction parse_recon_reduction(const std::string& name) {
    if (name == "sum") return ReconReduction::sum;
    if (name == "mean") return ReconReduction::mean;
    throw ConfigError(fmt::format("vae.recon_reduction '{}': expected sum or mean", name));
}

void Architecture::validate() const {
    if (window == 0) throw ConfigError("vae.window must be positive");
    if (hidden.empty()) throw ConfigError("vae.hidden needs at least one layer width");
    if (std::find(hidden.begin(), hidden.end(), 0u) != hidden.end()) throw ConfigError("vae.hidden widths must be positive");
    if (latent_dim < 1) throw ConfigError("vae.latent_dim must be at least 1");
    if (!(beta >= 0.0)) throw ConfigError(fmt::format("vae.beta {} must be non-negative", beta));
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError(fmt::format("vae.dropout {} outside [0, 1)", dropout));
}

void TrainConfig::validate() const {
    if (max_epochs < 1) throw ConfigError("train.max_epochs must be at least 1");
    if (early_stop_patience < 1) throw ConfigError("train.early_stop_patience must be at least 1");
    if (plateau_patience < 1) throw ConfigError("train.plateau_patience must be at least 1");
    if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) {
        throw ConfigError(fmt::format("train.plateau_factor {} outside (0, 1)", plateau_factor));
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError(fmt::format("train.learning_rate {} must be finite and non-negative", learning_rate));
    }
    if (batch_size < 1) throw ConfigError("train.batch_size must be at least 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw ConfigError(fmt::format("train.validation_fraction {} outside (0, 1)", validation_fraction));
    }
}

NormParams fit_norm(const MassSeries& mass) {
    if (mass.values.empty()) throw DegenerateInputError("cannot normalize an empty mass series");
    const auto [lo, hi] = std::minmax_element(mass.values.begin(), mass.values.end());
    if (!std::isfinite(*lo) || !std::isfinite(*hi)) throw DegenerateInputError("mass series holds non-finite values");
    if (!(*lo < *hi)) {
        throw DegenerateInputError(fmt::format("constant field (every value {}) cannot be min-max normalized", *lo));
    }
    return {*lo, *hi};
}

WindowSet make_windows(const MassSeries& mass, const NormParams& norm, std::size_t window) {
    if (mass.n_months < window) {
        throw ConfigError(fmt::format("series of {} months is shorter than the {}-month window", mass.n_months, window));
    }
    const std::size_t per_row = mass.n_months - window + 1;
    WindowSet set;
    set.windows.resize(static_cast<Eigen::Index>(window), static_cast<Eigen::Index>(per_row * mass.n_cells()));
    set.origins.reserve(per_row * mass.n_cells());
    Eigen::Index col = 0;
    for (std::size_t row = 0; row < mass.n_cells(); ++row) {
        const auto s = mass.series(row);
        for (std::size_t start = 0; start < per_row; ++start, ++col) {
            for (std::size_t k = 0; k < window; ++k) {
                set.windows(static_cast<Eigen::Index>(k), col) = norm.normalize(s[start + k]);
            }
            set.origins.push_back({row, start});
        }
    }
    return set;
}

std::pair<WindowSet, NormParams> normalize(const MassSeries& mass) {
    if (mass.n_months < kWindowLength) {
        throw ConfigError(fmt::format("normalization needs at least {} months, got {}", kWindowLength, mass.n_months));
    }
    const NormParams norm = fit_norm(mass);
    return {make_windows(mass, norm), norm};
}

double kl_divergence(const Vector& mu, const Vector& log_var) {
    if (mu.size() != log_var.size()) throw ShapeError("kl_divergence: mu and log_var lengths differ");
    return -0.5 * (1.0 + log_var.array() - mu.array().square() - log_var.array().exp()).sum();
}

LossParts vae_loss(const Vector& x, const Vector& x_hat, const Vector& mu, const Vector& log_var, double beta,
                   ReconReduction reduction) {
    if (x.size() != x_hat.size()) throw ShapeError("vae_loss: input and reconstruction lengths differ");
    if (x.size() == 0) throw ShapeError("vae_loss: empty window");
    LossParts parts;
    const double sse = (x - x_hat).squaredNorm();
    parts.mse = sse / static_cast<double>(x.size());
    parts.recon = reduction == ReconReduction::sum ? sse : parts.mse;
    parts.kl = kl_divergence(mu, log_var);
    parts.total = parts.recon + beta * parts.kl;
    return parts;
}

Vector reparameterize(const Vector& mu, const Vector& log_var, const Vector& eps) {
    if (mu.size() != log_var.size() || mu.size() != eps.size()) throw ShapeError("reparameterize: length mismatch");
    return mu.array() + (0.5 * log_var.array()).exp() * eps.array();
}

Vector reparameterize(const Vector& mu, const Vector& log_var, Rng& rng) {
    Vector eps(mu.size());
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = rng.normal();
    return reparameterize(mu, log_var, eps);
}

void VaeGradients::set_zero() {
    encoder.set_zero();
    mu_head.set_zero();
    log_var_head.set_zero();
    decoder.set_zero();
}

std::vector<std::span<const double>> VaeGradients::blocks() const {
    std::vector<std::span<const double>> out;
    for (const nn::MlpGradients* g : {&encoder, &mu_head, &log_var_head, &decoder}) {
        const auto b = nn::Mlp::gradient_blocks(*g);
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

VaeModel::VaeModel(const Architecture& arch) : arch_(arch) {
    arch_.validate();
    std::vector<nn::LayerSpec> trunk;
    for (const std::size_t width : arch_.hidden) trunk.push_back({width, nn::Activation::relu, true});
    encoder_ = nn::Mlp(arch_.window, trunk, arch_.dropout);

    const std::size_t last = arch_.hidden.back();
    mu_head_ = nn::Mlp(last, {{arch_.latent_dim, nn::Activation::identity, false}});
    log_var_head_ = nn::Mlp(last, {{arch_.latent_dim, nn::Activation::identity, false}});

    std::vector<nn::LayerSpec> dec;
    for (auto it = arch_.hidden.rbegin(); it != arch_.hidden.rend(); ++it) dec.push_back({*it, nn::Activation::relu, true});
    dec.push_back({arch_.window, nn::Activation::tanh, false});
    decoder_ = nn::Mlp(arch_.latent_dim, dec, arch_.dropout);
}

void VaeModel::set_dropout(double rate) {
    encoder_.set_dropout_rate(rate);
    decoder_.set_dropout_rate(rate);
    arch_.dropout = rate;
}

void VaeModel::init(Rng& rng) {
    encoder_.init_glorot(rng);
    mu_head_.init_glorot(rng);
    log_var_head_.init_glorot(rng);
    decoder_.init_glorot(rng);
}

Encoding VaeModel::encode(const Vector& window) const {
    if (static_cast<std::size_t>(window.size()) != arch_.window) {
        throw ShapeError(fmt::format("encode expects a {}-month window, got {}", arch_.window, window.size()));
    }
    const Matrix h = encoder_.forward(Matrix(window), nn::Mode::eval);
    return {mu_head_.forward(h, nn::Mode::eval).col(0), log_var_head_.forward(h, nn::Mode::eval).col(0)};
}

Vector VaeModel::decode(const Vector& z) const {
    if (static_cast<std::size_t>(z.size()) != arch_.latent_dim) {
        throw ShapeError(fmt::format("decode expects a latent vector of length {}, got {}", arch_.latent_dim, z.size()));
    }
    return decoder_.forward(Matrix(z), nn::Mode::eval).col(0);
}

LossParts VaeModel::batch_loss(const Matrix& batch, const Matrix& eps, nn::Mode mode, Rng* dropout_rng,
                               VaeGradients* grads) const {
    const Eigen::Index n = batch.cols();
    if (n == 0) throw ShapeError("batch_loss: empty batch");
    if (eps.rows() != static_cast<Eigen::Index>(arch_.latent_dim) || eps.cols() != n) {
        throw ShapeError(fmt::format("batch_loss: eps is {}x{}, expected {}x{}", eps.rows(), eps.cols(),
                                     arch_.latent_dim, n));
    }
    const bool want_grads = grads != nullptr;
    nn::ForwardCache enc_cache, mu_cache, lv_cache, dec_cache;

    const Matrix h = encoder_.forward(batch, mode, dropout_rng, want_grads ? &enc_cache : nullptr);
    const Matrix mu = mu_head_.forward(h, mode, dropout_rng, want_grads ? &mu_cache : nullptr);
    const Matrix log_var = log_var_head_.forward(h, mode, dropout_rng, want_grads ? &lv_cache : nullptr);
    const Matrix sigma = (0.5 * log_var.array()).exp().matrix();
    const Matrix z = mu + sigma.cwiseProduct(eps);
    const Matrix x_hat = decoder_.forward(z, mode, dropout_rng, want_grads ? &dec_cache : nullptr);

    const double scale = 1.0 / static_cast<double>(n);
    const Matrix residual = x_hat - batch;
    LossParts parts;
    const double recon_scale = arch_.recon_reduction == ReconReduction::sum ? 1.0 : 1.0 / static_cast<double>(batch.rows());
    parts.mse = residual.squaredNorm() / static_cast<double>(batch.rows()) * scale;
    parts.recon = residual.squaredNorm() * recon_scale * scale;
    parts.kl = -0.5 * (1.0 + log_var.array() - mu.array().square() - log_var.array().exp()).sum() * scale;
    parts.total = parts.recon + arch_.beta * parts.kl;

    if (want_grads) {
        const Matrix d_x_hat = residual * (2.0 * recon_scale * scale);
        const Matrix d_z = decoder_.backward(dec_cache, d_x_hat, grads->decoder);
        const Matrix d_mu = d_z + mu * (arch_.beta * scale);
        const Matrix d_log_var =
            (d_z.array() * 0.5 * sigma.array() * eps.array() +
             (arch_.beta * scale * 0.5) * (log_var.array().exp() - 1.0))
                .matrix();
        Matrix d_h = mu_head_.backward(mu_cache, d_mu, grads->mu_head);
        d_h += log_var_head_.backward(lv_cache, d_log_var, grads->log_var_head);
        encoder_.backward(enc_cache, d_h, grads->encoder);
    }
    return parts;
}

Matrix VaeModel::reconstruct_windows(const Matrix& batch) const {
    const Matrix h = encoder_.forward(batch, nn::Mode::eval);
    return decoder_.forward(mu_head_.forward(h, nn::Mode::eval), nn::Mode::eval);
}

VaeGradients VaeModel::make_gradients() const {
    return {encoder_.make_gradients(), mu_head_.make_gradients(), log_var_head_.make_gradients(),
            decoder_.make_gradients()};
}

std::vector<std::span<double>> VaeModel::parameters() {
    std::vector<std::span<double>> out;
    for (nn::Mlp* net : {&encoder_, &mu_head_, &log_var_head_, &decoder_}) {
        const auto p = net->parameters();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

std::vector<std::span<const double>> VaeModel::parameters() const {
    std::vector<std::span<const double>> out;
    for (const nn::Mlp* net : {&encoder_, &mu_head_, &log_var_head_, &decoder_}) {
        const auto p = net->parameters();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

std::size_t VaeModel::parameter_count() const {
    return encoder_.parameter_count() + mu_head_.parameter_count() + log_var_head_.parameter_count() +
           decoder_.parameter_count();
}

bool VaeModel::finite() const {
    return encoder_.finite() && mu_head_.finite() && log_var_head_.finite() && decoder_.finite();
}

std::vector<std::size_t> window_coverage(std::size_t n_months, std::size_t window) {
    std::vector<std::size_t> cover(n_months, 0);
    if (n_months < window) return cover;
    for (std::size_t start = 0; start + window <= n_months; ++start) {
        for (std::size_t k = 0; k < window; ++k) ++cover[start + k];
    }
    return cover;
}

Reconstruction reconstruct(const VaeModel& model, const MassSeries& mass) {
    const std::size_t window = model.architecture().window;
    if (mass.n_months < window) {
        throw ConfigError(fmt::format("series of {} months is shorter than the {}-month window", mass.n_months, window));
    }
    Reconstruction out;
    out.mass = mass;
    const std::vector<std::size_t> cover = window_coverage(mass.n_months, window);
    const std::size_t per_row = mass.n_months - window + 1;

    MassSeries one;
    one.cells = {0};
    one.n_months = mass.n_months;
    one.calendar = mass.calendar;
    for (std::size_t row = 0; row < mass.n_cells(); ++row) {
        const auto s = mass.series(row);
        one.values.assign(s.begin(), s.end());
        const WindowSet set = make_windows(one, model.norm, window);
        const Matrix decoded = model.reconstruct_windows(set.windows);

        std::vector<double> sum(mass.n_months, 0.0);
        for (std::size_t start = 0; start < per_row; ++start) {
            for (std::size_t k = 0; k < window; ++k) {
                sum[start + k] += decoded(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(start));
            }
        }
        auto target = out.mass.series(row);
        for (std::size_t m = 0; m < mass.n_months; ++m) {
            target[m] = model.norm.denormalize(sum[m] / static_cast<double>(cover[m]));
        }
    }
    out.valid_begin = std::min(window, mass.n_months);
    out.valid_end = mass.n_months > window ? mass.n_months - window : 0;
    if (out.valid_end < out.valid_begin) out.valid_end = out.valid_begin;
    return out;
}

AnomalyField vae_anomalies(const MassSeries& original, const Reconstruction& reconstructed) {
    const MassSeries& rec = reconstructed.mass;
    if (original.cells != rec.cells || original.n_months != rec.n_months || !(original.calendar == rec.calendar)) {
        throw ShapeError(fmt::format("vae_anomalies: original ({} cells x {} months) and reconstruction ({} x {}) "
                                     "are not aligned",
                                     original.n_cells(), original.n_months, rec.n_cells(), rec.n_months));
    }
    AnomalyField field;
    field.method = Method::vae;
    field.cells = original.cells;
    field.n_months = original.n_months;
    field.calendar = original.calendar;
    field.values.resize(original.values.size());
    for (std::size_t i = 0; i < field.values.size(); ++i) field.values[i] = original.values[i] - rec.values[i];
    field.valid_begin = reconstructed.valid_begin;
    field.valid_end = reconstructed.valid_end;
    return field;
}

}  // namespace gppx::vae
