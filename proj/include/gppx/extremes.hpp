#pragma once

#include "gppx/anomaly.hpp"
#include "gppx/grid.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gppx::extremes {

/// Months removed at each end of every anomaly series before thresholding,
/// matching the span the 12-month reconstruction window can fill.
inline constexpr std::size_t kEdgeTrimMonths = 12;
inline constexpr std::size_t kMinAnalysisMonths = 36;
inline constexpr double kTailPercent = 5.0;

enum class Sign { negative, positive };

/// two_sided: q_neg = |5th percentile|, q_pos = 95th percentile.
/// absolute: q_neg = q_pos = 95th percentile of |anomaly|.
enum class ThresholdMode { two_sided, absolute };

const char* to_string(ThresholdMode m);
ThresholdMode parse_threshold_mode(const std::string& name);

struct ThresholdSet {
    std::string region;
    Period period;
    Method method = Method::ssa;
    ThresholdMode mode = ThresholdMode::two_sided;
    double q_neg = 0.0;  // GgC; negative extremes are anomalies below -q_neg
    double q_pos = 0.0;  // GgC; positive extremes are anomalies above +q_pos
    std::size_t pool_size = 0;

    /// The single number a threshold table reports.
    double headline() const { return q_neg; }
};

/// Marks the first and last 12 months invalid. Idempotent. Throws DataError
/// for series shorter than 36 months.
AnomalyField trim_edges(const AnomalyField& anomalies);

/// Percentile `p` in [0, 100] by linear interpolation between order
/// statistics: rank h = (N - 1) * p / 100.
double percentile(std::vector<double> sample, double p);

/// Pools every valid (cell, month) anomaly of the mask's cells. Throws
/// EmptyRegionError on an empty pool.
ThresholdSet compute_thresholds(const AnomalyField& anomalies, const RegionMask& mask, const Period& period,
                                ThresholdMode mode = ThresholdMode::two_sided);

enum class Flag : std::int8_t { negative = -1, none = 0, positive = 1 };

struct ExtremeFlags {
    std::vector<std::size_t> cells;
    std::size_t n_months = 0;
    Calendar calendar;
    std::size_t valid_begin = 0;
    std::size_t valid_end = 0;
    std::vector<Flag> flags;  // [row][month]; always none outside the valid span

    Flag at(std::size_t row, std::size_t month) const { return flags[row * n_months + month]; }
    std::size_t count(Sign sign) const;
};

/// negative if a < -q_neg, positive if a > q_pos (strict), else none.
ExtremeFlags classify(const AnomalyField& anomalies, const ThresholdSet& thresholds);

/// Flag count per row (cell) over the valid months.
std::vector<std::size_t> frequency_map(const ExtremeFlags& flags, Sign sign);

struct RegionalSeries {
    std::vector<std::size_t> count;      // flagged cells per month
    std::vector<double> magnitude_tgc;   // sum of flagged anomalies, TgC
};

RegionalSeries regional_series(const AnomalyField& anomalies, const ExtremeFlags& flags, Sign sign);

struct ExtremesReport {
    ThresholdSet thresholds;
    AnomalyField anomalies;  // trimmed
    ExtremeFlags flags;
    std::vector<std::size_t> freq_negative;
    std::vector<std::size_t> freq_positive;
    RegionalSeries negative;
    RegionalSeries positive;
};

/// trim_edges, compute_thresholds, classify and aggregate, in that order.
ExtremesReport build_report(const AnomalyField& anomalies, const RegionMask& mask, const Period& period,
                            ThresholdMode mode = ThresholdMode::two_sided);

struct CumulativeTotals {
    double negative_tgc = 0.0;
    double positive_tgc = 0.0;
};

CumulativeTotals cumulative_totals(const ExtremesReport& report);

// CSV renderings. Every table has a header row; rows follow cell then month order.

/// region,period,method,threshold_GgC_neg,threshold_GgC_pos
std::string thresholds_csv(const std::vector<ThresholdSet>& rows);
/// cell,lat,lon,negative,positive
std::string frequency_map_csv(const ExtremesReport& report, std::size_t n_lon);
/// month,negative_count,negative_TgC,positive_count,positive_TgC over valid months
std::string regional_series_csv(const ExtremesReport& report);
/// cell,month,flag,anomaly_GgC for every flagged sample
std::string flags_csv(const ExtremesReport& report);

}  // namespace gppx::extremes
