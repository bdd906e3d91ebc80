#include "gppx/ssa.hpp"

#include "gppx/errors.hpp"

#include <cmath>
#include <complex>

#include <fmt/format.h>
#include <unsupported/Eigen/FFT>

namespace gppx::ssa {

void SsaConfig::validate(std::size_t n_months) const {
    if (window < 12) throw ConfigError(fmt::format("ssa.window {} must be at least 12 months", window));
    if (2 * window > n_months) {
        throw ConfigError(fmt::format("ssa.window {} needs series of at least {} months, got {}; use a window of at "
                                      "most {}",
                                      window, 2 * window, n_months, n_months / 2));
    }
    if (!(trend_cutoff >= 120.0)) throw ConfigError(fmt::format("ssa.trend_cutoff {} must be at least 120 months", trend_cutoff));
    if (!(seasonal_period > 0.0)) throw ConfigError("ssa.seasonal_period must be positive");
    if (!(seasonal_tolerance > 0.0)) throw ConfigError("ssa.seasonal_tolerance must be positive");
    if (max_harmonic < 1) throw ConfigError("ssa.max_harmonic must be at least 1");
}

Matrix embed(std::span<const double> series, std::size_t window) {
    const std::size_t n = series.size();
    if (window == 0 || n < 2 * window) {
        throw ConfigError(fmt::format("embedding window {} needs a series of at least {} values, got {}", window,
                                      2 * window, n));
    }
    const std::size_t k = n - window + 1;
    Matrix m(static_cast<Eigen::Index>(window), static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < window; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = series[i + j];
    }
    return m;
}

Eigentriples decompose(const Matrix& trajectory) {
    if (trajectory.size() == 0) throw ConfigError("cannot decompose an empty trajectory matrix");
    if (!trajectory.allFinite()) {
        throw NumericalError(fmt::format("trajectory matrix {}x{} holds non-finite values", trajectory.rows(),
                                         trajectory.cols()));
    }
    Eigen::BDCSVD<Matrix> svd(trajectory, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success || !svd.matrixU().allFinite() || !svd.matrixV().allFinite()) {
        throw NumericalError(fmt::format("SVD failed to converge on a {}x{} trajectory matrix (Frobenius norm {})",
                                         trajectory.rows(), trajectory.cols(), trajectory.norm()));
    }
    return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

std::vector<double> hankelize(const Matrix& m) {
    const auto rows = static_cast<std::size_t>(m.rows());
    const auto cols = static_cast<std::size_t>(m.cols());
    if (rows == 0 || cols == 0) return {};
    std::vector<double> out(rows + cols - 1, 0.0);
    std::vector<double> count(rows + cols - 1, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t i = 0; i < rows; ++i) {
            out[i + j] += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            count[i + j] += 1.0;
        }
    }
    for (std::size_t s = 0; s < out.size(); ++s) out[s] /= count[s];
    return out;
}

std::vector<double> elementary_component(const Eigentriples& triples, std::size_t idx) {
    const auto l = static_cast<std::size_t>(triples.left.rows());
    const auto k = static_cast<std::size_t>(triples.right.rows());
    const auto col = static_cast<Eigen::Index>(idx);
    const double sigma = triples.singular_values(col);
    const double* u = triples.left.col(col).data();
    const double* v = triples.right.col(col).data();
    std::vector<double> out(l + k - 1, 0.0);
    for (std::size_t s = 0; s < out.size(); ++s) {
        const std::size_t i_lo = s >= k ? s - k + 1 : 0;
        const std::size_t i_hi = std::min(l - 1, s);
        double acc = 0.0;
        for (std::size_t i = i_lo; i <= i_hi; ++i) acc += u[i] * v[s - i];
        out[s] = sigma * acc / static_cast<double>(i_hi - i_lo + 1);
    }
    return out;
}

std::optional<double> dominant_frequency(std::span<const double> component) {
    if (component.empty()) return std::nullopt;
    bool any = false;
    for (const double v : component) {
        if (!std::isfinite(v)) return std::nullopt;
        any = any || v != 0.0;
    }
    if (!any) return std::nullopt;

    std::size_t padded = 1;
    while (padded < 4 * component.size()) padded <<= 1;
    std::vector<double> buffer(padded, 0.0);
    std::copy(component.begin(), component.end(), buffer.begin());

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, buffer);

    std::size_t best = 0;
    double best_power = -1.0;
    for (std::size_t k = 0; k <= padded / 2; ++k) {
        const double power = std::norm(spectrum[k]);
        if (power > best_power) {
            best_power = power;
            best = k;
        }
    }
    return static_cast<double>(best) / static_cast<double>(padded);
}

const char* to_string(Group g) {
    switch (g) {
        case Group::trend: return "trend";
        case Group::seasonal: return "seasonal";
        case Group::residual: return "residual";
    }
    return "residual";
}

Group classify_frequency(std::optional<double> frequency, const SsaConfig& config) {
    if (!frequency) return Group::residual;
    const double f = *frequency;
    if (f < 1.0 / config.trend_cutoff) return Group::trend;
    for (int k = 1; k <= config.max_harmonic; ++k) {
        if (std::abs(f - k / config.seasonal_period) < config.seasonal_tolerance) return Group::seasonal;
    }
    return Group::residual;
}

SsaDecomposition group(const Eigentriples& triples, const SsaConfig& config) {
    const std::size_t n = static_cast<std::size_t>(triples.left.rows() + triples.right.rows() - 1);
    SsaDecomposition d;
    d.trend.assign(n, 0.0);
    d.seasonal.assign(n, 0.0);
    d.residual.assign(n, 0.0);
    d.eigentriples.reserve(triples.size());
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const std::vector<double> component = elementary_component(triples, i);
        EigentripleInfo info;
        info.singular_value = triples.singular_values(static_cast<Eigen::Index>(i));
        info.frequency = dominant_frequency(component);
        info.group = classify_frequency(info.frequency, config);
        std::vector<double>& target =
            info.group == Group::trend ? d.trend : (info.group == Group::seasonal ? d.seasonal : d.residual);
        for (std::size_t t = 0; t < n; ++t) target[t] += component[t];
        d.eigentriples.push_back(info);
    }
    return d;
}

SsaDecomposition decompose_series(std::span<const double> series, const SsaConfig& config) {
    config.validate(series.size());
    return group(decompose(embed(series, config.window)), config);
}

AnomalyField ssa_anomalies(const MassSeries& mass, const SsaConfig& config) {
    config.validate(mass.n_months);
    AnomalyField field;
    field.method = Method::ssa;
    field.cells = mass.cells;
    field.n_months = mass.n_months;
    field.calendar = mass.calendar;
    field.values.resize(mass.values.size());
    field.valid_begin = 0;
    field.valid_end = mass.n_months;
    for (std::size_t row = 0; row < mass.n_cells(); ++row) {
        const SsaDecomposition d = decompose_series(mass.series(row), config);
        std::copy(d.residual.begin(), d.residual.end(), field.series(row).begin());
    }
    return field;
}

std::string decomposition_csv(std::span<const double> original, const SsaDecomposition& d, const Calendar& calendar) {
    std::string out = "month,original,trend,seasonal,residual\n";
    for (std::size_t t = 0; t < original.size(); ++t) {
        const MonthStamp s = calendar.at(t);
        out += fmt::format("{}-{:02},{},{},{},{}\n", s.year, s.month, original[t], d.trend[t], d.seasonal[t],
                           d.residual[t]);
    }
    return out;
}

}  // namespace gppx::ssa
