#include "gppx/nn.hpp"

#include "gppx/errors.hpp"

#include <cmath>

#include <fmt/format.h>

namespace gppx::nn {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
    }
    return "identity";
}

Activation parse_activation(std::string_view name) {
    if (name == "identity") return Activation::identity;
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    throw FormatError(fmt::format("unknown activation '{}'", name));
}

Matrix activate(Activation a, const Matrix& pre) {
    switch (a) {
        case Activation::relu: return pre.cwiseMax(0.0);
        case Activation::tanh: return pre.array().tanh().matrix();
        case Activation::identity: break;
    }
    return pre;
}

Matrix activation_derivative(Activation a, const Matrix& pre, const Matrix& post) {
    switch (a) {
        case Activation::relu: return (pre.array() > 0.0).cast<double>().matrix();
        case Activation::tanh: return (1.0 - post.array().square()).matrix();
        case Activation::identity: break;
    }
    return Matrix::Ones(pre.rows(), pre.cols());
}

Vector DenseLayer::forward(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != in_dim()) {
        throw ShapeError(fmt::format("dense layer expects input length {}, got {}", in_dim(), x.size()));
    }
    return weights * x + bias;
}

Matrix DenseLayer::forward(const Matrix& batch) const {
    if (static_cast<std::size_t>(batch.rows()) != in_dim()) {
        throw ShapeError(fmt::format("dense layer expects {} input rows, got {}", in_dim(), batch.rows()));
    }
    Matrix out = weights * batch;
    out.colwise() += bias;
    return out;
}

void DenseLayer::init_glorot(Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in_dim() + out_dim()));
    // Column-major fill order, matching the checkpoint layout.
    for (Eigen::Index j = 0; j < weights.cols(); ++j) {
        for (Eigen::Index i = 0; i < weights.rows(); ++i) weights(i, j) = rng.uniform(-limit, limit);
    }
    bias.setZero();
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError(fmt::format("dropout rate {} outside [0, 1)", rate));
    const double keep_scale = 1.0 / (1.0 - rate);
    Matrix mask(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) mask(i, j) = rng.uniform() < rate ? 0.0 : keep_scale;
    }
    return mask;
}

Vector dropout(const Vector& x, double rate, Mode mode, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError(fmt::format("dropout rate {} outside [0, 1)", rate));
    if (mode == Mode::eval || rate == 0.0) return x;
    return x.cwiseProduct(dropout_mask(x.size(), 1, rate, rng).col(0));
}

void MlpGradients::set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : bias) b.setZero();
}

void ForwardCache::clear() {
    inputs.clear();
    pre.clear();
    post.clear();
    masks.clear();
}

Mlp::Mlp(std::size_t in_dim, std::vector<LayerSpec> specs, double dropout_rate)
    : in_dim_(in_dim), specs_(std::move(specs)) {
    set_dropout_rate(dropout_rate);
    std::size_t prev = in_dim_;
    for (const LayerSpec& s : specs_) {
        if (s.out_dim == 0) throw ConfigError("dense layer width must be positive");
        layers_.emplace_back(prev, s.out_dim);
        prev = s.out_dim;
    }
}

std::size_t Mlp::out_dim() const { return layers_.empty() ? in_dim_ : layers_.back().out_dim(); }

void Mlp::set_dropout_rate(double rate) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError(fmt::format("dropout rate {} outside [0, 1)", rate));
    dropout_rate_ = rate;
}

void Mlp::init_glorot(Rng& rng) {
    for (DenseLayer& layer : layers_) layer.init_glorot(rng);
}

Matrix Mlp::forward(const Matrix& batch, Mode mode, Rng* rng, ForwardCache* cache) const {
    if (static_cast<std::size_t>(batch.rows()) != in_dim_) {
        throw ShapeError(fmt::format("network expects {} input rows, got {}", in_dim_, batch.rows()));
    }
    if (cache) cache->clear();
    Matrix x = batch;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Matrix pre = layers_[l].forward(x);
        Matrix post = activate(specs_[l].activation, pre);
        Matrix mask;
        const bool drop = specs_[l].dropout && mode == Mode::train && dropout_rate_ > 0.0;
        if (drop) {
            if (!rng) throw ConfigError("train-mode dropout needs a random source");
            mask = dropout_mask(post.rows(), post.cols(), dropout_rate_, *rng);
        }
        Matrix out = drop ? Matrix(post.cwiseProduct(mask)) : post;
        if (cache) {
            cache->inputs.push_back(std::move(x));
            cache->pre.push_back(std::move(pre));
            cache->post.push_back(std::move(post));
            cache->masks.push_back(std::move(mask));
        }
        x = std::move(out);
    }
    return x;
}

Vector Mlp::forward(const Vector& x) const { return forward(Matrix(x), Mode::eval).col(0); }

Matrix Mlp::backward(const ForwardCache& cache, const Matrix& grad_out, MlpGradients& grads) const {
    if (cache.empty() || cache.inputs.size() != layers_.size()) {
        throw ConfigError("backward pass without a matching cached forward pass");
    }
    if (grads.weights.size() != layers_.size()) throw ConfigError("gradient buffer does not match network");
    if (grad_out.rows() != static_cast<Eigen::Index>(out_dim()) || grad_out.cols() != cache.inputs.front().cols()) {
        throw ShapeError(fmt::format("output gradient is {}x{}, expected {}x{}", grad_out.rows(), grad_out.cols(),
                                     out_dim(), cache.inputs.front().cols()));
    }
    Matrix delta = grad_out;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        if (cache.masks[l].size() != 0) delta = delta.cwiseProduct(cache.masks[l]);
        delta = delta.cwiseProduct(activation_derivative(specs_[l].activation, cache.pre[l], cache.post[l]));
        grads.weights[l].noalias() += delta * cache.inputs[l].transpose();
        grads.bias[l] += delta.rowwise().sum();
        delta = layers_[l].weights.transpose() * delta;
    }
    return delta;
}

MlpGradients Mlp::make_gradients() const {
    MlpGradients g;
    for (const DenseLayer& layer : layers_) {
        g.weights.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
        g.bias.push_back(Vector::Zero(layer.bias.size()));
    }
    return g;
}

std::vector<std::span<double>> Mlp::parameters() {
    std::vector<std::span<double>> out;
    for (DenseLayer& layer : layers_) {
        out.emplace_back(layer.weights.data(), static_cast<std::size_t>(layer.weights.size()));
        out.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
    }
    return out;
}

std::vector<std::span<const double>> Mlp::parameters() const {
    std::vector<std::span<const double>> out;
    for (const DenseLayer& layer : layers_) {
        out.emplace_back(layer.weights.data(), static_cast<std::size_t>(layer.weights.size()));
        out.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
    }
    return out;
}

std::vector<std::span<const double>> Mlp::gradient_blocks(const MlpGradients& grads) {
    std::vector<std::span<const double>> out;
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        out.emplace_back(grads.weights[l].data(), static_cast<std::size_t>(grads.weights[l].size()));
        out.emplace_back(grads.bias[l].data(), static_cast<std::size_t>(grads.bias[l].size()));
    }
    return out;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const DenseLayer& layer : layers_) n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
    return n;
}

bool Mlp::finite() const {
    for (const DenseLayer& layer : layers_) {
        if (!layer.finite()) return false;
    }
    return true;
}

void adam_step(AdamState& state, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads) {
    if (params.size() != grads.size()) {
        throw ShapeError(fmt::format("adam: {} parameter blocks but {} gradient blocks", params.size(), grads.size()));
    }
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (params[b].size() != grads[b].size()) {
            throw ShapeError(fmt::format("adam: block {} has {} parameters but {} gradients", b, params[b].size(),
                                         grads[b].size()));
        }
        for (std::size_t i = 0; i < grads[b].size(); ++i) {
            if (!std::isfinite(grads[b][i])) {
                throw NumericalError(fmt::format("adam: non-finite gradient {} in block {} element {} at step {}",
                                                 grads[b][i], b, i, state.step + 1));
            }
        }
    }
    if (state.first_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.size(), 0.0);
            state.second_moment.emplace_back(p.size(), 0.0);
        }
    } else if (state.first_moment.size() != params.size()) {
        throw ShapeError("adam: parameter blocks changed since the first step");
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto& m = state.first_moment[b];
        auto& v = state.second_moment[b];
        if (m.size() != params[b].size()) throw ShapeError(fmt::format("adam: moment shape changed for block {}", b));
        for (std::size_t i = 0; i < params[b].size(); ++i) {
            const double g = grads[b][i];
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            params[b][i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

}  // namespace gppx::nn
