#pragma once

// Variational autoencoder over 12-month windows of regional GPP mass.
//
// Encoder: window -> hidden trunk (ReLU + dropout) -> {mu, log variance}
// heads. Decoder: z -> reversed hidden trunk (ReLU + dropout) -> window with
// a tanh output layer, so reconstructions stay inside the [-1, 1] range the
// inputs are normalized to.

#include "gppx/anomaly.hpp"
#include "gppx/grid.hpp"
#include "gppx/nn.hpp"
#include "gppx/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gppx::vae {

using nn::Matrix;
using nn::Vector;

inline constexpr std::size_t kWindowLength = 12;

/// Min-max scaling to [-1, 1].
struct NormParams {
    double x_min = 0.0;
    double x_max = 1.0;

    double normalize(double x) const { return 2.0 * (x - x_min) / (x_max - x_min) - 1.0; }
    double denormalize(double y) const { return (y + 1.0) * 0.5 * (x_max - x_min) + x_min; }
};

/// How the per-window reconstruction error enters the loss. `sum` is the
/// squared error summed over the window, a Gaussian log-likelihood with fixed
/// variance up to a constant; `mean` divides it by the window length.
enum class ReconReduction { sum, mean };

const char* to_string(ReconReduction r);
ReconReduction parse_recon_reduction(const std::string& name);

struct Architecture {
    std::size_t window = kWindowLength;
    std::vector<std::size_t> hidden{128, 64, 32};
    std::size_t latent_dim = 5;
    double dropout = 0.01;
    double beta = 0.5;
    ReconReduction recon_reduction = ReconReduction::sum;

    void validate() const;
};

struct TrainConfig {
    std::size_t max_epochs = 500;
    std::size_t early_stop_patience = 50;
    std::size_t plateau_patience = 5;
    double plateau_factor = 0.5;
    double learning_rate = 0.005;
    std::size_t batch_size = 64;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Normalized stride-1 windows, one per column.
struct WindowSet {
    struct Origin {
        std::size_t row = 0;    // row of the source MassSeries
        std::size_t start = 0;  // first month of the window
    };
    Matrix windows;  // [window x n_windows]
    std::vector<Origin> origins;

    std::size_t size() const { return origins.size(); }
};

/// Global min/max over every cell and month of `mass`. Throws
/// DegenerateInputError when the field is constant.
NormParams fit_norm(const MassSeries& mass);

/// Stride-1 windows over each row, scaled with `norm`.
WindowSet make_windows(const MassSeries& mass, const NormParams& norm, std::size_t window = kWindowLength);

/// fit_norm followed by make_windows. Throws ConfigError if n_months < 12.
std::pair<WindowSet, NormParams> normalize(const MassSeries& mass);

struct Encoding {
    Vector mu;
    Vector log_var;
};

struct LossParts {
    double total = 0.0;
    double recon = 0.0;  // reconstruction term as it enters `total`
    double kl = 0.0;
    double mse = 0.0;  // mean squared error per window component
};

/// -1/2 * sum(1 + log_var - mu^2 - exp(log_var)).
double kl_divergence(const Vector& mu, const Vector& log_var);

/// total = recon + beta * kl, with recon the squared error over the window
/// reduced by `reduction`.
LossParts vae_loss(const Vector& x, const Vector& x_hat, const Vector& mu, const Vector& log_var, double beta,
                   ReconReduction reduction = ReconReduction::sum);

/// z = mu + exp(log_var / 2) * eps.
Vector reparameterize(const Vector& mu, const Vector& log_var, const Vector& eps);
Vector reparameterize(const Vector& mu, const Vector& log_var, Rng& rng);

struct VaeGradients {
    nn::MlpGradients encoder;
    nn::MlpGradients mu_head;
    nn::MlpGradients log_var_head;
    nn::MlpGradients decoder;

    void set_zero();
    std::vector<std::span<const double>> blocks() const;
};

class VaeModel {
public:
    VaeModel() : VaeModel(Architecture{}) {}
    explicit VaeModel(const Architecture& arch);

    const Architecture& architecture() const { return arch_; }
    void set_dropout(double rate);

    /// Glorot weights, zero biases.
    void init(Rng& rng);

    /// Eval mode: dropout off.
    Encoding encode(const Vector& window) const;
    Vector decode(const Vector& z) const;

    /// Mean loss over the batch [window x B] with latent noise `eps`
    /// [latent x B]. When `grads` is non-null, accumulates the gradient of
    /// that mean loss with respect to every parameter.
    LossParts batch_loss(const Matrix& batch, const Matrix& eps, nn::Mode mode, Rng* dropout_rng,
                         VaeGradients* grads) const;

    /// Decodes z = mu for every column (eval mode).
    Matrix reconstruct_windows(const Matrix& batch) const;

    VaeGradients make_gradients() const;

    /// Blocks in declaration order: encoder, mu head, log-variance head, decoder.
    std::vector<std::span<double>> parameters();
    std::vector<std::span<const double>> parameters() const;
    std::size_t parameter_count() const;
    bool finite() const;

    nn::Mlp& encoder() { return encoder_; }
    nn::Mlp& mu_head() { return mu_head_; }
    nn::Mlp& log_var_head() { return log_var_head_; }
    nn::Mlp& decoder() { return decoder_; }
    const nn::Mlp& encoder() const { return encoder_; }
    const nn::Mlp& mu_head() const { return mu_head_; }
    const nn::Mlp& log_var_head() const { return log_var_head_; }
    const nn::Mlp& decoder() const { return decoder_; }

    NormParams norm;

private:
    Architecture arch_;
    nn::Mlp encoder_;
    nn::Mlp mu_head_;
    nn::Mlp log_var_head_;
    nn::Mlp decoder_;
};

struct TrainReport {
    std::vector<double> train_loss;  // per epoch, mean over training windows
    std::vector<double> val_loss;    // per epoch, total validation loss
    std::vector<double> val_recon;
    std::vector<double> val_kl;
    std::vector<double> val_mse;  // reconstruction from z = mu, per window component
    std::vector<double> learning_rate;  // rate used during each epoch
    std::size_t best_epoch = 0;         // 1-based
    double best_val_loss = 0.0;
    bool early_stopped = false;
    std::uint64_t seed = 0;

    std::size_t epochs_run() const { return val_loss.size(); }
};

struct TrainResult {
    VaeModel model;  // parameters from the best validation epoch
    TrainReport report;
};

/// Seeded 80/20-style split, minibatch Adam, plateau halving of the
/// learning rate and early stopping, both driven by the validation loss.
/// Validation runs in eval mode with one fixed latent noise draw per window.
TrainResult train(const WindowSet& windows, const NormParams& norm, const Architecture& arch,
                  const TrainConfig& config);

/// Months covered by each of the stride-1 windows over a series.
std::vector<std::size_t> window_coverage(std::size_t n_months, std::size_t window = kWindowLength);

struct Reconstruction {
    MassSeries mass;  // reconstructed GgC/month, full length
    std::size_t valid_begin = 0;
    std::size_t valid_end = 0;
};

/// Overlap-averaged reconstruction: every stride-1 window is decoded from
/// z = mu and each month averages the windows covering it. Months outside
/// [12, n_months - 12) are flagged invalid.
Reconstruction reconstruct(const VaeModel& model, const MassSeries& mass);

/// original - reconstructed over the reconstruction's valid months.
AnomalyField vae_anomalies(const MassSeries& original, const Reconstruction& reconstructed);

// Checkpoints: JSON manifest plus a little-endian float64 parameter payload.
struct CheckpointMeta {
    std::uint64_t seed = 0;
    std::size_t epoch = 0;  // best epoch
};

void save_checkpoint(const VaeModel& model, const CheckpointMeta& meta, const std::filesystem::path& stem);
VaeModel load_checkpoint(const std::filesystem::path& stem, CheckpointMeta* meta = nullptr);

/// Small exhaustive search over latent size, hidden widths and learning rate.
struct SearchSpace {
    std::vector<std::size_t> latent_dims{5};
    std::vector<std::vector<std::size_t>> hidden{{128, 64, 32}};
    std::vector<double> learning_rates{0.005};

    std::size_t trial_count() const { return latent_dims.size() * hidden.size() * learning_rates.size(); }
};

inline constexpr std::size_t kMaxSearchTrials = 20;

struct Trial {
    std::size_t index = 0;
    std::size_t latent_dim = 0;
    std::vector<std::size_t> hidden;
    double learning_rate = 0.0;
    double best_val_loss = 0.0;
    std::size_t best_epoch = 0;
};

struct SearchResult {
    std::vector<Trial> trials;
    std::size_t best = 0;  // lowest validation loss, earliest index on ties
};

SearchResult grid_search(const WindowSet& windows, const NormParams& norm, const Architecture& base_arch,
                         const TrainConfig& base_config, const SearchSpace& space);

}  // namespace gppx::vae
