#pragma once

// Seeded input generators and small helpers shared by the test suites.

#include "gppx/anomaly.hpp"
#include "gppx/grid.hpp"
#include "gppx/rng.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

namespace gen {

inline std::vector<double> uniform_vector(gppx::Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

inline std::vector<double> normal_vector(gppx::Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = scale * rng.normal();
    return v;
}

inline Eigen::VectorXd uniform_eigen(gppx::Rng& rng, Eigen::Index n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
    return v;
}

inline Eigen::MatrixXd uniform_matrix(gppx::Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
    return m;
}

inline Eigen::MatrixXd normal_matrix(gppx::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

inline double sine(double t, double period, double amplitude = 1.0, double phase = 0.0) {
    return amplitude * std::sin(2.0 * std::numbers::pi * (t - phase) / period);
}

/// n samples of amplitude * sin(2 pi t / period).
inline std::vector<double> sine_series(std::size_t n, double period, double amplitude = 1.0) {
    std::vector<double> v(n);
    for (std::size_t t = 0; t < n; ++t) v[t] = sine(static_cast<double>(t), period, amplitude);
    return v;
}

/// Positive flux grid with random areas and land fractions in (0.2, 1].
inline gppx::GridSeries random_grid(gppx::Rng& rng, std::size_t n_lat, std::size_t n_lon, std::size_t n_months) {
    gppx::GridSeries g;
    g.n_lat = n_lat;
    g.n_lon = n_lon;
    g.n_months = n_months;
    g.calendar = {1850, 1};
    g.values = uniform_vector(rng, g.n_cells() * n_months, 1e-6, 1e-4);
    g.cell_area = uniform_vector(rng, g.n_cells(), 1e9, 1e10);
    g.land_frac = uniform_vector(rng, g.n_cells(), 0.2, 1.0);
    return g;
}

/// Grid whose every cell follows fn(cell, month).
template <class F>
gppx::GridSeries grid_from(std::size_t n_lat, std::size_t n_lon, std::size_t n_months, F fn) {
    gppx::GridSeries g;
    g.n_lat = n_lat;
    g.n_lon = n_lon;
    g.n_months = n_months;
    g.calendar = {1850, 1};
    g.values.resize(g.n_cells() * n_months);
    for (std::size_t c = 0; c < g.n_cells(); ++c)
        for (std::size_t m = 0; m < n_months; ++m) g.values[c * n_months + m] = fn(c, m);
    g.cell_area.assign(g.n_cells(), 1e10);
    g.land_frac.assign(g.n_cells(), 1.0);
    return g;
}

inline gppx::MassSeries mass_from(const std::vector<std::vector<double>>& rows, gppx::Calendar cal = {1850, 1}) {
    gppx::MassSeries m;
    m.n_months = rows.empty() ? 0 : rows.front().size();
    m.calendar = cal;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        m.cells.push_back(r);
        m.values.insert(m.values.end(), rows[r].begin(), rows[r].end());
    }
    return m;
}

/// Gaussian anomalies for `cells` rows, all months valid.
inline gppx::AnomalyField random_anomalies(gppx::Rng& rng, std::size_t cells, std::size_t months,
                                           double scale = 100.0, gppx::Method method = gppx::Method::ssa) {
    gppx::AnomalyField a;
    a.method = method;
    a.n_months = months;
    a.calendar = {1850, 1};
    for (std::size_t c = 0; c < cells; ++c) a.cells.push_back(c);
    a.values = normal_vector(rng, cells * months, scale);
    a.valid_begin = 0;
    a.valid_end = months;
    return a;
}

inline gppx::RegionMask mask_of(std::size_t cells, std::string name = "R") {
    gppx::RegionMask m;
    m.name = std::move(name);
    for (std::size_t c = 0; c < cells; ++c) m.cells.push_back(c);
    m.min_land_frac = 0.0;
    return m;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("gppx_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace gen
