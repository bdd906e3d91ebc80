#pragma once

#include "gppx/grid.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace gppx {

enum class Method { vae, ssa };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

/// Per-cell anomaly series in GgC/month. Only months in
/// [valid_begin, valid_end) take part in thresholding.
struct AnomalyField {
    Method method = Method::ssa;
    std::vector<std::size_t> cells;  // grid cell ids, one per row
    std::size_t n_months = 0;
    Calendar calendar;
    std::vector<double> values;  // [row][month]
    std::size_t valid_begin = 0;
    std::size_t valid_end = 0;

    std::size_t n_cells() const { return cells.size(); }
    std::size_t valid_months() const { return valid_end > valid_begin ? valid_end - valid_begin : 0; }
    bool is_valid(std::size_t month) const { return month >= valid_begin && month < valid_end; }
    std::span<const double> series(std::size_t row) const { return {values.data() + row * n_months, n_months}; }
    std::span<double> series(std::size_t row) { return {values.data() + row * n_months, n_months}; }
    double at(std::size_t row, std::size_t month) const { return values[row * n_months + month]; }
};

}  // namespace gppx
