#pragma once

// Singular spectrum analysis baseline.
//
// Each cell series is embedded in an L x K trajectory matrix, split into
// elementary components by SVD, and every component is assigned by its
// dominant frequency to the trend (periods of 10 years and more), the annual
// cycle (12 months and harmonics) or the residual. The residual is the
// anomaly.

#include "gppx/anomaly.hpp"
#include "gppx/grid.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gppx::ssa {

using Matrix = Eigen::MatrixXd;

struct SsaConfig {
    std::size_t window = 120;           // L, months
    double trend_cutoff = 120.0;        // months; periods >= this are trend
    double seasonal_period = 12.0;      // months
    double seasonal_tolerance = 0.004;  // cycles/month around each harmonic
    int max_harmonic = 6;

    /// Checks the config against a series length. Throws ConfigError.
    void validate(std::size_t n_months) const;
};

/// Column j is series[j, j + L). Throws ConfigError unless N >= 2L.
Matrix embed(std::span<const double> series, std::size_t window);

struct Eigentriples {
    Eigen::VectorXd singular_values;  // non-increasing
    Matrix left;                      // [L x r]
    Matrix right;                     // [K x r]

    std::size_t size() const { return static_cast<std::size_t>(singular_values.size()); }
};

/// Thin SVD of the trajectory matrix. Throws NumericalError if the solver
/// fails or returns non-finite factors.
Eigentriples decompose(const Matrix& trajectory);

/// Anti-diagonal averaging of an L x K matrix into a series of length L+K-1.
std::vector<double> hankelize(const Matrix& m);

/// hankelize(sigma_i * u_i * v_i^T) without forming the matrix.
std::vector<double> elementary_component(const Eigentriples& triples, std::size_t i);

/// Argmax of the periodogram of the series zero-padded to the next power of
/// two that is at least four times its length, in cycles per month. Empty
/// for an all-zero (or non-finite) series.
std::optional<double> dominant_frequency(std::span<const double> component);

enum class Group { trend, seasonal, residual };

const char* to_string(Group g);

/// Band rules: f < 1/trend_cutoff is trend; |f - k/period| < tolerance for
/// k in 1..max_harmonic is seasonal; everything else, including an
/// undefined frequency, is residual.
Group classify_frequency(std::optional<double> frequency, const SsaConfig& config);

struct EigentripleInfo {
    double singular_value = 0.0;
    std::optional<double> frequency;
    Group group = Group::residual;
};

struct SsaDecomposition {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> residual;
    std::vector<EigentripleInfo> eigentriples;
};

/// Sums the elementary components of `triples` by group.
SsaDecomposition group(const Eigentriples& triples, const SsaConfig& config);

/// embed, decompose and group one series.
SsaDecomposition decompose_series(std::span<const double> series, const SsaConfig& config);

/// Residual group of every row of `mass`, all months valid (edge trimming
/// happens downstream). Throws ConfigError suggesting a smaller window when
/// the series are shorter than 2L.
AnomalyField ssa_anomalies(const MassSeries& mass, const SsaConfig& config);

/// Audit dump: `month,original,trend,seasonal,residual`, one row per month.
std::string decomposition_csv(std::span<const double> original, const SsaDecomposition& d, const Calendar& calendar);

}  // namespace gppx::ssa
