#pragma once

#include "gppx/extremes.hpp"

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace gppx::compare {

/// Agreement between the VAE and SSA extremes of one region and period.
struct AgreementStats {
    std::string region;
    Period period;
    double correlation_negative = 0.0;  // Pearson over cells of the frequency maps
    double correlation_positive = 0.0;
    double jaccard_negative = 0.0;  // flagged (cell, month) sets
    double jaccard_positive = 0.0;
    double threshold_vae = 0.0;  // headline thresholds, GgC
    double threshold_ssa = 0.0;
    extremes::CumulativeTotals cumulative_vae;
    extremes::CumulativeTotals cumulative_ssa;
};

/// Pearson correlation. When either input has zero variance the result is
/// 1 for identical inputs and 0 otherwise.
double pearson(std::span<const double> a, std::span<const double> b);

/// |A and B| / |A or B| over flagged samples of one sign; 1 when both are empty.
double jaccard(const extremes::ExtremeFlags& a, const extremes::ExtremeFlags& b, extremes::Sign sign);

/// `first` fills the VAE slots and `second` the SSA slots. Throws
/// ShapeError when the reports cover different cells, months or valid spans.
AgreementStats compare_methods(const extremes::ExtremesReport& first, const extremes::ExtremesReport& second);

struct ThresholdRow {
    std::string region;
    Period period;
    double vae = 0.0;
    double ssa = 0.0;
};

/// Rows grouped by region in order of first appearance, periods ascending.
std::vector<ThresholdRow> threshold_table(const std::vector<AgreementStats>& stats);

/// "Region | Period | VAE (GgC) | SSA (GgC)" with whole-number thresholds.
std::string threshold_table_text(const std::vector<ThresholdRow>& rows);
std::string threshold_table_csv(const std::vector<ThresholdRow>& rows);

std::string agreement_csv(const std::vector<AgreementStats>& stats);
nlohmann::json agreement_json(const std::vector<AgreementStats>& stats);

}  // namespace gppx::compare
