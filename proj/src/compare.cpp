#include "gppx/compare.hpp"

#include "gppx/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace gppx::compare {

using extremes::ExtremeFlags;
using extremes::ExtremesReport;
using extremes::Flag;
using extremes::Sign;

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("pearson: inputs differ in length");
    if (a.empty()) throw ShapeError("pearson: empty inputs");
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) return std::equal(a.begin(), a.end(), b.begin()) ? 1.0 : 0.0;
    return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

double jaccard(const ExtremeFlags& a, const ExtremeFlags& b, Sign sign) {
    if (a.flags.size() != b.flags.size()) throw ShapeError("jaccard: flag sets differ in shape");
    const Flag want = sign == Sign::negative ? Flag::negative : Flag::positive;
    std::size_t both = 0, either = 0;
    for (std::size_t i = 0; i < a.flags.size(); ++i) {
        const bool in_a = a.flags[i] == want;
        const bool in_b = b.flags[i] == want;
        both += in_a && in_b;
        either += in_a || in_b;
    }
    return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

namespace {

std::vector<double> as_double(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

AgreementStats compare_methods(const ExtremesReport& first, const ExtremesReport& second) {
    const ExtremeFlags& a = first.flags;
    const ExtremeFlags& b = second.flags;
    if (a.cells != b.cells) throw ShapeError("compare: reports cover different cells");
    if (a.n_months != b.n_months || !(a.calendar == b.calendar) || a.valid_begin != b.valid_begin ||
        a.valid_end != b.valid_end) {
        throw ShapeError(fmt::format("compare: month spans differ ([{}, {}) of {} vs [{}, {}) of {})", a.valid_begin,
                                     a.valid_end, a.n_months, b.valid_begin, b.valid_end, b.n_months));
    }
    if (first.thresholds.region != second.thresholds.region || !(first.thresholds.period == second.thresholds.period)) {
        throw ShapeError(fmt::format("compare: {} {} vs {} {}", first.thresholds.region,
                                     first.thresholds.period.slug(), second.thresholds.region,
                                     second.thresholds.period.slug()));
    }
    AgreementStats s;
    s.region = first.thresholds.region;
    s.period = first.thresholds.period;
    s.correlation_negative = pearson(as_double(first.freq_negative), as_double(second.freq_negative));
    s.correlation_positive = pearson(as_double(first.freq_positive), as_double(second.freq_positive));
    s.jaccard_negative = jaccard(a, b, Sign::negative);
    s.jaccard_positive = jaccard(a, b, Sign::positive);
    s.threshold_vae = first.thresholds.headline();
    s.threshold_ssa = second.thresholds.headline();
    s.cumulative_vae = extremes::cumulative_totals(first);
    s.cumulative_ssa = extremes::cumulative_totals(second);
    return s;
}

std::vector<ThresholdRow> threshold_table(const std::vector<AgreementStats>& stats) {
    std::vector<std::string> region_order;
    for (const AgreementStats& s : stats) {
        if (std::find(region_order.begin(), region_order.end(), s.region) == region_order.end()) {
            region_order.push_back(s.region);
        }
    }
    std::vector<ThresholdRow> rows;
    rows.reserve(stats.size());
    for (const AgreementStats& s : stats) rows.push_back({s.region, s.period, s.threshold_vae, s.threshold_ssa});
    const auto rank = [&](const std::string& r) {
        return std::find(region_order.begin(), region_order.end(), r) - region_order.begin();
    };
    std::stable_sort(rows.begin(), rows.end(), [&](const ThresholdRow& x, const ThresholdRow& y) {
        if (rank(x.region) != rank(y.region)) return rank(x.region) < rank(y.region);
        if (x.period.start_year != y.period.start_year) return x.period.start_year < y.period.start_year;
        return x.period.end_year < y.period.end_year;
    });
    return rows;
}

std::string threshold_table_text(const std::vector<ThresholdRow>& rows) {
    std::string out = "Region | Period | VAE (GgC) | SSA (GgC)\n";
    for (const ThresholdRow& r : rows) {
        out += fmt::format("{} | {} | {:.0f} | {:.0f}\n", r.region, r.period.label(), r.vae, r.ssa);
    }
    return out;
}

std::string threshold_table_csv(const std::vector<ThresholdRow>& rows) {
    std::string out = "Region,Period,VAE (GgC),SSA (GgC)\n";
    for (const ThresholdRow& r : rows) out += fmt::format("{},{},{},{}\n", r.region, r.period.label(), r.vae, r.ssa);
    return out;
}

std::string agreement_csv(const std::vector<AgreementStats>& stats) {
    std::string out =
        "region,period,corr_negative,corr_positive,jaccard_negative,jaccard_positive,threshold_vae_GgC,"
        "threshold_ssa_GgC,cumulative_negative_vae_TgC,cumulative_negative_ssa_TgC,cumulative_positive_vae_TgC,"
        "cumulative_positive_ssa_TgC\n";
    for (const AgreementStats& s : stats) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", s.region, s.period.label(),
                           s.correlation_negative, s.correlation_positive, s.jaccard_negative, s.jaccard_positive,
                           s.threshold_vae, s.threshold_ssa, s.cumulative_vae.negative_tgc,
                           s.cumulative_ssa.negative_tgc, s.cumulative_vae.positive_tgc, s.cumulative_ssa.positive_tgc);
    }
    return out;
}

nlohmann::json agreement_json(const std::vector<AgreementStats>& stats) {
    nlohmann::json out = nlohmann::json::array();
    for (const AgreementStats& s : stats) {
        out.push_back({
            {"region", s.region},
            {"period", s.period.label()},
            {"correlation", {{"negative", s.correlation_negative}, {"positive", s.correlation_positive}}},
            {"jaccard", {{"negative", s.jaccard_negative}, {"positive", s.jaccard_positive}}},
            {"threshold_GgC", {{"vae", s.threshold_vae}, {"ssa", s.threshold_ssa}}},
            {"cumulative_TgC",
             {{"vae", {{"negative", s.cumulative_vae.negative_tgc}, {"positive", s.cumulative_vae.positive_tgc}}},
              {"ssa", {{"negative", s.cumulative_ssa.negative_tgc}, {"positive", s.cumulative_ssa.positive_tgc}}}}},
        });
    }
    return out;
}

}  // namespace gppx::compare
