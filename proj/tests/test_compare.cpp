#include "generators.hpp"

#include "gppx/compare.hpp"
#include "gppx/errors.hpp"

#include <algorithm>
#include <cmath>

#include <doctest.h>

using namespace gppx;
using namespace gppx::compare;
using extremes::ExtremesReport;
using extremes::Sign;

namespace {

ExtremesReport report_for(const AnomalyField& a, const std::string& region = "R", Period period = {1850, 1880}) {
    return extremes::build_report(a, gen::mask_of(a.n_cells(), region), period);
}

double oracle_pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = double(a.size());
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
        saa += a[i] * a[i];
        sbb += b[i] * b[i];
        sab += a[i] * b[i];
    }
    return (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
}

AgreementStats row(const std::string& region, int start, double vae, double ssa) {
    AgreementStats s;
    s.region = region;
    s.period = {start, start + 30};
    s.threshold_vae = vae;
    s.threshold_ssa = ssa;
    return s;
}

}  // namespace

TEST_SUITE("compare") {

TEST_CASE("pearson against a textbook formula") {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(50);
        const auto a = gen::normal_vector(rng, n);
        const auto b = gen::normal_vector(rng, n);
        const double r = pearson(a, b);
        CHECK(r == doctest::Approx(oracle_pearson(a, b)).epsilon(1e-10));
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);
        CHECK(std::abs(pearson(a, a) - 1.0) < 1e-12);
    }
    const std::vector<double> flat(5, 2.0);
    CHECK(pearson(flat, flat) == 1.0);
    CHECK(pearson(flat, std::vector<double>{1, 2, 3, 4, 5}) == 0.0);
    CHECK_THROWS_AS(pearson(flat, std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("identical reports agree perfectly") {
    Rng rng(2);
    const ExtremesReport r = report_for(gen::random_anomalies(rng, 6, 120));
    const AgreementStats s = compare_methods(r, r);
    CHECK(s.correlation_negative == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.correlation_positive == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.jaccard_negative == 1.0);
    CHECK(s.jaccard_positive == 1.0);
    CHECK(s.threshold_vae == s.threshold_ssa);
}

TEST_CASE("disjoint flag sets of equal size have Jaccard 0") {
    Rng rng(3);
    AnomalyField a = gen::random_anomalies(rng, 1, 60, 0.0);
    AnomalyField b = a;
    a.values[20] = -10.0;
    b.values[30] = -10.0;
    const AgreementStats s = compare_methods(report_for(a), report_for(b));
    CHECK(s.jaccard_negative == 0.0);
    CHECK(s.jaccard_positive == 1.0);
}

TEST_CASE("agreement is symmetric under argument swap and bounded") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t cells = 2 + rng.below(8);
        const AnomalyField a = gen::random_anomalies(rng, cells, 60);
        AnomalyField b = a;
        for (double& v : b.values) v += 60.0 * rng.normal();
        b.method = Method::vae;
        const ExtremesReport ra = report_for(a);
        const ExtremesReport rb = report_for(b);
        const AgreementStats ab = compare_methods(rb, ra);
        const AgreementStats ba = compare_methods(ra, rb);
        CHECK(ab.correlation_negative == doctest::Approx(ba.correlation_negative).epsilon(1e-14));
        CHECK(ab.correlation_positive == doctest::Approx(ba.correlation_positive).epsilon(1e-14));
        CHECK(ab.jaccard_negative == ba.jaccard_negative);
        CHECK(ab.jaccard_positive == ba.jaccard_positive);
        CHECK(ab.threshold_vae == ba.threshold_ssa);
        for (double j : {ab.jaccard_negative, ab.jaccard_positive}) {
            CHECK(j >= 0.0);
            CHECK(j <= 1.0);
        }
        for (double c : {ab.correlation_negative, ab.correlation_positive}) {
            CHECK(c >= -1.0);
            CHECK(c <= 1.0);
        }
    }
}

TEST_CASE("jaccard over hand-built flag sets") {
    extremes::ExtremeFlags a;
    a.cells = {0, 1};
    a.n_months = 40;
    a.valid_begin = 12;
    a.valid_end = 28;
    a.flags.assign(80, extremes::Flag::none);
    extremes::ExtremeFlags b = a;
    for (std::size_t m : {14, 15, 16}) a.flags[m] = extremes::Flag::negative;
    for (std::size_t m : {15, 16, 17}) b.flags[m] = extremes::Flag::negative;
    b.flags[40 + 20] = extremes::Flag::positive;
    CHECK(jaccard(a, b, Sign::negative) == doctest::Approx(2.0 / 4.0));
    CHECK(jaccard(a, b, Sign::positive) == 0.0);
    CHECK(jaccard(a, a, Sign::positive) == 1.0);
}

TEST_CASE("mismatched reports are rejected") {
    Rng rng(6);
    const ExtremesReport r = report_for(gen::random_anomalies(rng, 3, 60));
    CHECK_THROWS_AS(compare_methods(r, report_for(gen::random_anomalies(rng, 4, 60))), ShapeError);
    CHECK_THROWS_AS(compare_methods(r, report_for(gen::random_anomalies(rng, 3, 72))), ShapeError);
    CHECK_THROWS_AS(compare_methods(r, report_for(gen::random_anomalies(rng, 3, 60), "OTHER")), ShapeError);
    CHECK_THROWS_AS(compare_methods(r, report_for(gen::random_anomalies(rng, 3, 60), "R", {1950, 1980})), ShapeError);
}

TEST_CASE("threshold table: one row per region and period, four columns") {
    const std::vector<ThresholdRow> one = threshold_table({row("WNA", 1850, 179.2, 99.6)});
    REQUIRE(one.size() == 1);
    CHECK(threshold_table_text(one) == "Region | Period | VAE (GgC) | SSA (GgC)\nWNA | 1850–80 | 179 | 100\n");
    CHECK(threshold_table_csv(one) == "Region,Period,VAE (GgC),SSA (GgC)\nWNA,1850–80,179.2,99.6\n");
}

TEST_CASE("four regions by three periods give twelve rows, region-major in first-seen order") {
    // Fed in scrambled order.
    const std::vector<AgreementStats> input{
        row("WNA", 2050, 457, 368), row("CNA", 1950, 520, 412), row("WNA", 1850, 179, 100),
        row("ENA", 2050, 462, 324), row("NCA", 1850, 526, 503), row("CNA", 1850, 302, 321),
        row("WNA", 1950, 255, 171), row("ENA", 1850, 308, 211), row("NCA", 2050, 756, 784),
        row("CNA", 2050, 683, 515), row("ENA", 1950, 401, 263), row("NCA", 1950, 635, 510),
    };
    const auto rows = threshold_table(input);
    const std::string text = threshold_table_text(rows);
    CHECK(text ==
          "Region | Period | VAE (GgC) | SSA (GgC)\n"
          "WNA | 1850–80 | 179 | 100\n"
          "WNA | 1950–80 | 255 | 171\n"
          "WNA | 2050–80 | 457 | 368\n"
          "CNA | 1850–80 | 302 | 321\n"
          "CNA | 1950–80 | 520 | 412\n"
          "CNA | 2050–80 | 683 | 515\n"
          "ENA | 1850–80 | 308 | 211\n"
          "ENA | 1950–80 | 401 | 263\n"
          "ENA | 2050–80 | 462 | 324\n"
          "NCA | 1850–80 | 526 | 503\n"
          "NCA | 1950–80 | 635 | 510\n"
          "NCA | 2050–80 | 756 | 784\n");
}

TEST_CASE("agreement outputs") {
    Rng rng(7);
    const ExtremesReport r = report_for(gen::random_anomalies(rng, 3, 60), "WNA");
    const std::vector<AgreementStats> stats{compare_methods(r, r)};
    const std::string csv = agreement_csv(stats);
    const std::string header = csv.substr(0, csv.find('\n'));
    CHECK(std::count(header.begin(), header.end(), ',') == 11);
    CHECK(csv.find("\nWNA,1850–80,1,1,1,1,") != std::string::npos);

    const nlohmann::json j = agreement_json(stats);
    REQUIRE(j.size() == 1);
    CHECK(j[0]["region"] == "WNA");
    CHECK(j[0]["jaccard"]["negative"] == 1.0);
    CHECK(j[0]["threshold_GgC"]["vae"] == stats[0].threshold_vae);
}

}  // TEST_SUITE
