#include "generators.hpp"

#include "gppx/errors.hpp"
#include "gppx/nn.hpp"

#include <cmath>
#include <limits>

#include <doctest.h>

using namespace gppx;
using namespace gppx::nn;

namespace {

/// L = sum(weights .* net(x)); dL/d out = weights.
double linear_functional(const Mlp& net, const Matrix& x, const Matrix& weights, std::uint64_t dropout_seed) {
    Rng rng(dropout_seed);
    return (net.forward(x, Mode::train, &rng).array() * weights.array()).sum();
}

double max_relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

/// Central differences over every parameter against backward().
double gradient_check(Mlp& net, const Matrix& x, const Matrix& weights, std::uint64_t dropout_seed) {
    Rng rng(dropout_seed);
    ForwardCache cache;
    net.forward(x, Mode::train, &rng, &cache);
    MlpGradients grads = net.make_gradients();
    net.backward(cache, weights, grads);
    const auto analytic = Mlp::gradient_blocks(grads);

    const double h = 1e-5;
    double worst = 0.0;
    auto params = net.parameters();
    for (std::size_t b = 0; b < params.size(); ++b) {
        for (std::size_t i = 0; i < params[b].size(); ++i) {
            const double saved = params[b][i];
            params[b][i] = saved + h;
            const double up = linear_functional(net, x, weights, dropout_seed);
            params[b][i] = saved - h;
            const double down = linear_functional(net, x, weights, dropout_seed);
            params[b][i] = saved;
            worst = std::max(worst, max_relative_error(analytic[b][i], (up - down) / (2 * h)));
        }
    }
    return worst;
}

std::vector<std::span<const double>> const_blocks(std::vector<std::vector<double>>& g) {
    std::vector<std::span<const double>> out;
    for (auto& v : g) out.emplace_back(v);
    return out;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("dense forward by hand") {
    DenseLayer identity(2, 2);
    identity.weights = Matrix::Identity(2, 2);
    Vector x(2);
    x << 1, 2;
    CHECK(identity.forward(x) == x);

    DenseLayer sum(2, 1);
    sum.weights << 1, 1;
    sum.bias << 3;
    Vector y(2);
    y << 2, 2;
    CHECK(sum.forward(y)(0) == 7.0);

    CHECK_THROWS_AS(sum.forward(Vector(Vector::Zero(3))), ShapeError);
}

TEST_CASE("activations and derivatives") {
    Matrix pre(3, 1);
    pre << -1, 0, 2;
    const Matrix relu = activate(Activation::relu, pre);
    CHECK(relu(0) == 0.0);
    CHECK(relu(1) == 0.0);
    CHECK(relu(2) == 2.0);
    const Matrix relu_d = activation_derivative(Activation::relu, pre, relu);
    CHECK(relu_d(0) == 0.0);
    CHECK(relu_d(2) == 1.0);

    const Matrix zero = Matrix::Zero(1, 1);
    const Matrix t = activate(Activation::tanh, zero);
    CHECK(t(0) == 0.0);
    CHECK(activation_derivative(Activation::tanh, zero, t)(0) == 1.0);

    CHECK(parse_activation(to_string(Activation::tanh)) == Activation::tanh);
    CHECK_THROWS(parse_activation("gelu"));
}

TEST_CASE("dropout modes") {
    Rng rng(1);
    Vector x = gen::uniform_eigen(rng, 50, -2, 2);
    CHECK(dropout(x, 0.0, Mode::train, rng) == x);
    CHECK(dropout(x, 0.0, Mode::eval, rng) == x);
    CHECK(dropout(x, 0.5, Mode::eval, rng) == x);

    const Vector d = dropout(x, 0.5, Mode::train, rng);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        CHECK((d(i) == 0.0 || d(i) == doctest::Approx(2.0 * x(i))));
    }
}

TEST_CASE("inverted dropout preserves the expectation") {
    Rng rng(2);
    Vector x(4);
    x << 1.0, -0.5, 2.0, 0.25;
    Vector sum = Vector::Zero(4);
    const int n = 100'000;
    for (int i = 0; i < n; ++i) sum += dropout(x, 0.2, Mode::train, rng);
    const Vector mean = sum / n;
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(mean(i) == doctest::Approx(x(i)).epsilon(0.01));
}

TEST_CASE("glorot init stays inside its bound with zero bias") {
    Rng rng(3);
    DenseLayer layer(12, 8);
    layer.init_glorot(rng);
    const double bound = std::sqrt(6.0 / 20.0);
    CHECK(layer.weights.cwiseAbs().maxCoeff() <= bound);
    CHECK(layer.weights.cwiseAbs().maxCoeff() > 0.5 * bound);
    CHECK(layer.bias.isZero());
}

TEST_CASE("backprop on a 2-2-2 network matches central differences") {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        Mlp net(2, {{2, Activation::tanh, false}, {2, Activation::identity, false}});
        net.init_glorot(rng);
        for (auto& layer : net.layers()) layer.bias = gen::uniform_eigen(rng, layer.bias.size(), -0.5, 0.5);
        const Matrix x = gen::uniform_matrix(rng, 2, 3, -1, 1);
        const Matrix w = gen::uniform_matrix(rng, 2, 3, -1, 1);
        CHECK(gradient_check(net, x, w, 0) < 1e-4);
    }
}

TEST_CASE("backprop through relu and dropout matches central differences") {
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        Mlp net(6, {{8, Activation::relu, true}, {5, Activation::relu, true}, {3, Activation::tanh, false}}, 0.3);
        net.init_glorot(rng);
        for (auto& layer : net.layers()) layer.bias = gen::uniform_eigen(rng, layer.bias.size(), 0.05, 0.3);
        const Matrix x = gen::uniform_matrix(rng, 6, 4, -1, 1);
        const Matrix w = gen::uniform_matrix(rng, 3, 4, -1, 1);
        CHECK(gradient_check(net, x, w, 100 + trial) < 1e-4);
    }
}

TEST_CASE("zero output gradient gives zero parameter gradients") {
    Rng rng(6);
    Mlp net(3, {{4, Activation::relu, false}, {2, Activation::tanh, false}});
    net.init_glorot(rng);
    ForwardCache cache;
    const Matrix x = gen::uniform_matrix(rng, 3, 5, -1, 1);
    net.forward(x, Mode::eval, nullptr, &cache);
    MlpGradients g = net.make_gradients();
    const Matrix dx = net.backward(cache, Matrix::Zero(2, 5), g);
    for (auto block : Mlp::gradient_blocks(g))
        for (double v : block) CHECK(v == 0.0);
    CHECK(dx.isZero());
}

TEST_CASE("backward without a forward cache is rejected") {
    Mlp net(2, {{2, Activation::identity, false}});
    MlpGradients g = net.make_gradients();
    CHECK_THROWS_AS(net.backward(ForwardCache{}, Matrix::Zero(2, 1), g), ConfigError);
}

TEST_CASE("linear least squares: backprop equals the residual formula and vanishes at the normal equations") {
    Rng rng(7);
    const Eigen::Index n = 40;
    const Matrix x = gen::uniform_matrix(rng, 3, n, -1, 1);
    const Matrix y = gen::uniform_matrix(rng, 2, n, -1, 1);

    Mlp net(3, {{2, Activation::identity, false}});
    net.init_glorot(rng);

    // L = 1/(2n) * ||W x + b - y||^2
    const auto grads_at = [&](const Mlp& m) {
        ForwardCache cache;
        const Matrix out = m.forward(x, Mode::eval, nullptr, &cache);
        MlpGradients g = m.make_gradients();
        m.backward(cache, (out - y) / static_cast<double>(n), g);
        return g;
    };

    const DenseLayer& layer = net.layers()[0];
    const Matrix residual = (layer.weights * x).colwise() + layer.bias - y;
    const MlpGradients g = grads_at(net);
    CHECK((g.weights[0] - residual * x.transpose() / static_cast<double>(n)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((g.bias[0] - residual.rowwise().sum() / static_cast<double>(n)).cwiseAbs().maxCoeff() < 1e-13);

    // Normal equations on the augmented design [x; 1].
    Matrix design(4, n);
    design << x, Matrix::Ones(1, n);
    const Matrix theta = (design * design.transpose()).ldlt().solve(design * y.transpose()).transpose();
    net.layers()[0].weights = theta.leftCols(3);
    net.layers()[0].bias = theta.col(3);
    const MlpGradients at_optimum = grads_at(net);
    CHECK(at_optimum.weights[0].cwiseAbs().maxCoeff() < 1e-12);
    CHECK(at_optimum.bias[0].cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("first Adam step from zero state is -lr * g / (|g| + eps)") {
    std::vector<double> theta{0.5, -1.0, 2.0, 0.0};
    std::vector<std::vector<double>> grad{{0.3, -2.0, 1e-9, -4.0}};
    AdamState state;
    state.learning_rate = 0.01;
    std::vector<std::span<double>> params{theta};
    const std::vector<double> before = theta;
    adam_step(state, params, const_blocks(grad));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[0][i];
        const double expected = -0.01 * g / (std::abs(g) + 1e-8);
        CHECK(theta[i] - before[i] == doctest::Approx(expected).epsilon(1e-9));
    }
    CHECK(state.step == 1);
}

TEST_CASE("constant gradient drives the Adam step towards lr * sign(g)") {
    std::vector<double> theta{0.0, 0.0};
    std::vector<std::vector<double>> grad{{0.7, -3.0}};
    AdamState state;
    state.learning_rate = 0.002;
    std::vector<std::span<double>> params{theta};
    std::vector<double> last = theta;
    for (int i = 0; i < 5000; ++i) {
        last = theta;
        adam_step(state, params, const_blocks(grad));
    }
    CHECK(theta[0] - last[0] == doctest::Approx(-0.002).epsilon(1e-6));
    CHECK(theta[1] - last[1] == doctest::Approx(0.002).epsilon(1e-6));
}

TEST_CASE("zero gradient leaves parameters unchanged and decays the moments") {
    std::vector<double> theta{1.0, 2.0};
    std::vector<std::vector<double>> grad{{0.5, -0.5}};
    AdamState state;
    std::vector<std::span<double>> params{theta};
    adam_step(state, params, const_blocks(grad));
    const auto m1 = state.first_moment[0];
    const auto v1 = state.second_moment[0];

    std::vector<std::vector<double>> zero{{0.0, 0.0}};
    const std::vector<double> fresh{1.0, 2.0};
    std::vector<double> untouched = fresh;
    AdamState cold;
    std::vector<std::span<double>> cold_params{untouched};
    adam_step(cold, cold_params, const_blocks(zero));
    CHECK(untouched == fresh);

    adam_step(state, params, const_blocks(zero));
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(state.first_moment[0][i] == doctest::Approx(0.9 * m1[i]));
        CHECK(state.second_moment[0][i] == doctest::Approx(0.999 * v1[i]));
    }
}

TEST_CASE("Adam with lr = 0 leaves parameters unchanged") {
    Rng rng(8);
    std::vector<double> theta = gen::uniform_vector(rng, 10, -1, 1);
    const std::vector<double> before = theta;
    AdamState state;
    state.learning_rate = 0.0;
    std::vector<std::span<double>> params{theta};
    for (int i = 0; i < 20; ++i) {
        std::vector<std::vector<double>> grad{gen::uniform_vector(rng, 10, -1, 1)};
        adam_step(state, params, const_blocks(grad));
    }
    CHECK(theta == before);
}

TEST_CASE("non-finite gradient aborts before any update") {
    std::vector<double> a{1.0, 2.0};
    std::vector<double> b{3.0};
    std::vector<std::vector<double>> grad{{0.1, 0.2}, {std::numeric_limits<double>::quiet_NaN()}};
    AdamState state;
    std::vector<std::span<double>> params{a, b};
    CHECK_THROWS_WITH_AS(adam_step(state, params, const_blocks(grad)), doctest::Contains("block 1"), NumericalError);
    CHECK(a == std::vector<double>{1.0, 2.0});
    CHECK(b == std::vector<double>{3.0});
}

}  // TEST_SUITE
