#pragma once

// Dense-network building blocks with hand-written backpropagation.
//
// Batches are column-major: an [features x batch] matrix holds one sample
// per column.

#include "gppx/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gppx::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { identity, relu, tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

Matrix activate(Activation a, const Matrix& pre);
/// d activation / d pre, elementwise. `post` is activate(a, pre).
Matrix activation_derivative(Activation a, const Matrix& pre, const Matrix& post);

enum class Mode { train, eval };

struct DenseLayer {
    Matrix weights;  // [out_dim x in_dim]
    Vector bias;     // [out_dim]

    DenseLayer() = default;
    DenseLayer(std::size_t in_dim, std::size_t out_dim)
        : weights(Matrix::Zero(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim))),
          bias(Vector::Zero(static_cast<Eigen::Index>(out_dim))) {}

    std::size_t in_dim() const { return static_cast<std::size_t>(weights.cols()); }
    std::size_t out_dim() const { return static_cast<std::size_t>(weights.rows()); }

    /// y = W x + b. Throws ShapeError on a length mismatch.
    Vector forward(const Vector& x) const;
    Matrix forward(const Matrix& batch) const;

    /// Uniform in +-sqrt(6 / (fan_in + fan_out)), zero bias.
    void init_glorot(Rng& rng);

    bool finite() const { return weights.allFinite() && bias.allFinite(); }
};

/// Inverted dropout: in train mode each element is zeroed with probability
/// `rate` and survivors are scaled by 1 / (1 - rate); eval mode is identity.
Vector dropout(const Vector& x, double rate, Mode mode, Rng& rng);

/// Mask for a [rows x cols] activation: entries are 0 or 1 / (1 - rate).
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);

struct LayerSpec {
    std::size_t out_dim = 0;
    Activation activation = Activation::identity;
    bool dropout = false;
};

/// Parameter gradients with the same block structure as an Mlp.
struct MlpGradients {
    std::vector<Matrix> weights;
    std::vector<Vector> bias;

    void set_zero();
};

/// Values kept by a forward pass for the matching backward pass.
struct ForwardCache {
    std::vector<Matrix> inputs;  // input to each layer
    std::vector<Matrix> pre;     // W x + b
    std::vector<Matrix> post;    // activation output before dropout
    std::vector<Matrix> masks;   // dropout masks; empty when inactive

    bool empty() const { return inputs.empty(); }
    void clear();
};

/// Dense layers, each followed by an activation and optionally dropout.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::size_t in_dim, std::vector<LayerSpec> specs, double dropout_rate = 0.0);

    std::size_t in_dim() const { return in_dim_; }
    std::size_t out_dim() const;
    double dropout_rate() const { return dropout_rate_; }
    void set_dropout_rate(double rate);

    const std::vector<LayerSpec>& specs() const { return specs_; }
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    void init_glorot(Rng& rng);

    /// `rng` is only drawn from in train mode with a positive dropout rate.
    /// Pass `cache` to enable backward().
    Matrix forward(const Matrix& batch, Mode mode, Rng* rng = nullptr, ForwardCache* cache = nullptr) const;
    Vector forward(const Vector& x) const;

    /// Accumulates parameter gradients into `grads` (which must come from
    /// make_gradients()) and returns d loss / d input. Throws ConfigError if
    /// `cache` does not hold a matching forward pass.
    Matrix backward(const ForwardCache& cache, const Matrix& grad_out, MlpGradients& grads) const;

    MlpGradients make_gradients() const;

    /// Parameter blocks in declaration order: W0, b0, W1, b1, ...
    std::vector<std::span<double>> parameters();
    std::vector<std::span<const double>> parameters() const;
    static std::vector<std::span<const double>> gradient_blocks(const MlpGradients& grads);

    std::size_t parameter_count() const;
    bool finite() const;

private:
    std::size_t in_dim_ = 0;
    std::vector<LayerSpec> specs_;
    std::vector<DenseLayer> layers_;
    double dropout_rate_ = 0.0;
};

struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

/// One bias-corrected Adam update in place. Moments are allocated on first
/// use. Throws NumericalError naming the block and element of the first
/// non-finite gradient, before touching any parameter.
void adam_step(AdamState& state, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads);

}  // namespace gppx::nn
