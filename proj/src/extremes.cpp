#include "gppx/extremes.hpp"

#include "gppx/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace gppx::extremes {

const char* to_string(ThresholdMode m) { return m == ThresholdMode::two_sided ? "two_sided" : "absolute"; }

ThresholdMode parse_threshold_mode(const std::string& name) {
    if (name == "two_sided") return ThresholdMode::two_sided;
    if (name == "absolute") return ThresholdMode::absolute;
    throw ConfigError(fmt::format("unknown threshold mode '{}' (expected two_sided or absolute)", name));
}

AnomalyField trim_edges(const AnomalyField& anomalies) {
    if (anomalies.n_months < kMinAnalysisMonths) {
        throw DataError(fmt::format("edge trimming needs at least {} months, got {}", kMinAnalysisMonths,
                                    anomalies.n_months));
    }
    AnomalyField out = anomalies;
    out.valid_begin = std::max(anomalies.valid_begin, kEdgeTrimMonths);
    out.valid_end = std::min(anomalies.valid_end, anomalies.n_months - kEdgeTrimMonths);
    if (out.valid_end < out.valid_begin) out.valid_end = out.valid_begin;
    return out;
}

double percentile(std::vector<double> sample, double p) {
    if (sample.empty()) throw EmptyRegionError("percentile of an empty sample");
    if (!(p >= 0.0 && p <= 100.0)) throw ConfigError(fmt::format("percentile {} outside [0, 100]", p));
    std::sort(sample.begin(), sample.end());
    const double h = static_cast<double>(sample.size() - 1) * p / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sample.size() - 1);
    return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

ThresholdSet compute_thresholds(const AnomalyField& anomalies, const RegionMask& mask, const Period& period,
                                ThresholdMode mode) {
    std::vector<double> pool;
    pool.reserve(anomalies.n_cells() * anomalies.valid_months());
    for (std::size_t row = 0; row < anomalies.n_cells(); ++row) {
        if (std::find(mask.cells.begin(), mask.cells.end(), anomalies.cells[row]) == mask.cells.end()) continue;
        const auto s = anomalies.series(row);
        pool.insert(pool.end(), s.begin() + static_cast<std::ptrdiff_t>(anomalies.valid_begin),
                    s.begin() + static_cast<std::ptrdiff_t>(anomalies.valid_end));
    }
    if (pool.empty()) {
        throw EmptyRegionError(fmt::format("region {}: no valid anomalies to pool for thresholds", mask.name));
    }
    ThresholdSet t;
    t.region = mask.name;
    t.period = period;
    t.method = anomalies.method;
    t.mode = mode;
    t.pool_size = pool.size();
    if (mode == ThresholdMode::two_sided) {
        t.q_neg = std::max(0.0, -percentile(pool, kTailPercent));
        t.q_pos = std::max(0.0, percentile(pool, 100.0 - kTailPercent));
    } else {
        for (double& v : pool) v = std::abs(v);
        t.q_neg = t.q_pos = percentile(std::move(pool), 100.0 - kTailPercent);
    }
    return t;
}

std::size_t ExtremeFlags::count(Sign sign) const {
    const Flag want = sign == Sign::negative ? Flag::negative : Flag::positive;
    return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), want));
}

ExtremeFlags classify(const AnomalyField& anomalies, const ThresholdSet& thresholds) {
    if (anomalies.method != thresholds.method) {
        throw ConfigError(fmt::format("classify: {} anomalies with {} thresholds", to_string(anomalies.method),
                                      to_string(thresholds.method)));
    }
    ExtremeFlags out;
    out.cells = anomalies.cells;
    out.n_months = anomalies.n_months;
    out.calendar = anomalies.calendar;
    out.valid_begin = anomalies.valid_begin;
    out.valid_end = anomalies.valid_end;
    out.flags.assign(anomalies.values.size(), Flag::none);
    for (std::size_t row = 0; row < anomalies.n_cells(); ++row) {
        for (std::size_t m = anomalies.valid_begin; m < anomalies.valid_end; ++m) {
            const double a = anomalies.at(row, m);
            Flag& f = out.flags[row * anomalies.n_months + m];
            if (a < -thresholds.q_neg) {
                f = Flag::negative;
            } else if (a > thresholds.q_pos) {
                f = Flag::positive;
            }
        }
    }
    return out;
}

std::vector<std::size_t> frequency_map(const ExtremeFlags& flags, Sign sign) {
    const Flag want = sign == Sign::negative ? Flag::negative : Flag::positive;
    std::vector<std::size_t> counts(flags.cells.size(), 0);
    for (std::size_t row = 0; row < flags.cells.size(); ++row) {
        for (std::size_t m = flags.valid_begin; m < flags.valid_end; ++m) {
            if (flags.at(row, m) == want) ++counts[row];
        }
    }
    return counts;
}

RegionalSeries regional_series(const AnomalyField& anomalies, const ExtremeFlags& flags, Sign sign) {
    if (anomalies.cells != flags.cells || anomalies.n_months != flags.n_months) {
        throw ShapeError("regional_series: anomalies and flags are not aligned");
    }
    const Flag want = sign == Sign::negative ? Flag::negative : Flag::positive;
    RegionalSeries out;
    out.count.assign(flags.n_months, 0);
    out.magnitude_tgc.assign(flags.n_months, 0.0);
    for (std::size_t m = flags.valid_begin; m < flags.valid_end; ++m) {
        double sum_ggc = 0.0;
        for (std::size_t row = 0; row < flags.cells.size(); ++row) {
            if (flags.at(row, m) != want) continue;
            ++out.count[m];
            sum_ggc += anomalies.at(row, m);
        }
        out.magnitude_tgc[m] = sum_ggc * 1e-3;
    }
    return out;
}

ExtremesReport build_report(const AnomalyField& anomalies, const RegionMask& mask, const Period& period,
                            ThresholdMode mode) {
    ExtremesReport r;
    r.anomalies = trim_edges(anomalies);
    r.thresholds = compute_thresholds(r.anomalies, mask, period, mode);
    r.flags = classify(r.anomalies, r.thresholds);
    r.freq_negative = frequency_map(r.flags, Sign::negative);
    r.freq_positive = frequency_map(r.flags, Sign::positive);
    r.negative = regional_series(r.anomalies, r.flags, Sign::negative);
    r.positive = regional_series(r.anomalies, r.flags, Sign::positive);
    return r;
}

CumulativeTotals cumulative_totals(const ExtremesReport& report) {
    CumulativeTotals t;
    for (const double v : report.negative.magnitude_tgc) t.negative_tgc += v;
    for (const double v : report.positive.magnitude_tgc) t.positive_tgc += v;
    return t;
}

std::string thresholds_csv(const std::vector<ThresholdSet>& rows) {
    std::string out = "region,period,method,threshold_GgC_neg,threshold_GgC_pos\n";
    for (const ThresholdSet& t : rows) {
        out += fmt::format("{},{},{},{},{}\n", t.region, t.period.label(), to_string(t.method), t.q_neg, t.q_pos);
    }
    return out;
}

std::string frequency_map_csv(const ExtremesReport& report, std::size_t n_lon) {
    std::string out = "cell,lat,lon,negative,positive\n";
    for (std::size_t row = 0; row < report.flags.cells.size(); ++row) {
        const std::size_t c = report.flags.cells[row];
        out += fmt::format("{},{},{},{},{}\n", c, c / n_lon, c % n_lon, report.freq_negative[row],
                           report.freq_positive[row]);
    }
    return out;
}

std::string regional_series_csv(const ExtremesReport& report) {
    std::string out = "month,negative_count,negative_TgC,positive_count,positive_TgC\n";
    const ExtremeFlags& f = report.flags;
    for (std::size_t m = f.valid_begin; m < f.valid_end; ++m) {
        const MonthStamp s = f.calendar.at(m);
        out += fmt::format("{}-{:02},{},{},{},{}\n", s.year, s.month, report.negative.count[m],
                           report.negative.magnitude_tgc[m], report.positive.count[m], report.positive.magnitude_tgc[m]);
    }
    return out;
}

std::string flags_csv(const ExtremesReport& report) {
    std::string out = "cell,month,flag,anomaly_GgC\n";
    const ExtremeFlags& f = report.flags;
    for (std::size_t row = 0; row < f.cells.size(); ++row) {
        for (std::size_t m = f.valid_begin; m < f.valid_end; ++m) {
            const Flag flag = f.at(row, m);
            if (flag == Flag::none) continue;
            const MonthStamp s = f.calendar.at(m);
            out += fmt::format("{},{}-{:02},{},{}\n", f.cells[row], s.year, s.month,
                               flag == Flag::negative ? "negative" : "positive", report.anomalies.at(row, m));
        }
    }
    return out;
}

}  // namespace gppx::extremes
