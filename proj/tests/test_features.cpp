#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"
#include "tidepool/features.hpp"
#include "tidepool/ingest.hpp"
#include "tidepool/textprep.hpp"

using namespace tidepool;
namespace ts = testing_support;

namespace {

DailyBar bar(Date d, double close) {
    DailyBar b;
    b.date = d;
    b.open = b.high = b.low = b.close = close;
    b.volume = 10;
    return b;
}

std::vector<FeatureRow> fixture_rows() {
    auto bars = load_bars(ts::fixture("bars_month.csv"));
    return build_rows(bars, load_scores(ts::fixture("sentiment_golden.csv"))).rows;
}

FeatureRow row_with_close(double close) {
    FeatureRow r;
    r.close = close;
    return r;
}

} // namespace

TEST(BuildRows, PairsEachBarWithItsPredecessor) {
    std::vector<DailyBar> bars{bar(Date(2023, 1, 2), 10), bar(Date(2023, 1, 3), 12)};
    std::map<Date, SentimentScores> scores{{Date(2023, 1, 2), {0.2, 0.3, 0.5}}};
    auto out = build_rows(bars, scores);
    ASSERT_EQ(out.rows.size(), 1u);
    EXPECT_EQ(out.rows[0].date, Date(2023, 1, 3));
    EXPECT_EQ(out.rows[0].prev_close, 10);
    EXPECT_EQ(out.rows[0].close, 12);
    EXPECT_EQ(out.rows[0].positive, 0.5);
    EXPECT_TRUE(out.warnings.empty());
}

TEST(BuildRows, MissingSentimentFallsBackToUniformWithWarning) {
    std::vector<DailyBar> bars{bar(Date(2023, 1, 2), 10), bar(Date(2023, 1, 3), 12)};
    auto out = build_rows(bars, {});
    ASSERT_EQ(out.rows.size(), 1u);
    EXPECT_EQ(out.rows[0].negative, 1.0 / 3.0);
    EXPECT_EQ(out.rows[0].neutral, 1.0 / 3.0);
    EXPECT_EQ(out.rows[0].positive, 1.0 / 3.0);
    EXPECT_EQ(out.warnings.size(), 1u);
}

TEST(BuildRows, NeedsTwoBars) {
    std::vector<DailyBar> bars{bar(Date(2023, 1, 2), 10)};
    EXPECT_THROW(build_rows(bars, {}), Error);
}

TEST(BuildRows, FixtureMonthMatchesGoldenTable) {
    const auto rows = fixture_rows();
    const auto golden = csv::read(ts::fixture("features_golden.csv"));
    ASSERT_EQ(rows.size(), 20u);
    ASSERT_EQ(golden.size(), 21u);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& g = golden[r + 1].fields;
        EXPECT_EQ(rows[r].date.to_string(), g[0]);
        for (std::size_t c = 0; c <= kPredictorCount; ++c)
            EXPECT_EQ(rows[r].column(c), *csv::parse_double(g[c + 1])) << "row " << r << " column " << c;
    }
}

TEST(FeaturesCsv, RoundTripIsExact) {
    const auto rows = fixture_rows();
    std::ostringstream out;
    write_features(out, rows);
    EXPECT_EQ(parse_features(out.str()), rows);
}

TEST(Scaler, FitsMinAndMax) {
    std::vector<FeatureRow> rows{row_with_close(0), row_with_close(10)};
    auto p = fit_scaler(rows);
    EXPECT_EQ(p.mins[p.target_column()], 0);
    EXPECT_EQ(p.maxes[p.target_column()], 10);
    EXPECT_EQ(p.scale(p.target_column(), 5), 0.5);
    EXPECT_EQ(p.scale(p.target_column(), 0), 0.0);
    EXPECT_EQ(p.scale(p.target_column(), 10), 1.0);
}

TEST(Scaler, ConstantColumnIsDegenerateAndMapsToZero) {
    std::vector<FeatureRow> rows{row_with_close(5), row_with_close(5), row_with_close(5)};
    auto p = fit_scaler(rows);
    EXPECT_EQ(p.mins[p.target_column()], 5);
    EXPECT_EQ(p.maxes[p.target_column()], 5);
    EXPECT_EQ(p.scale(p.target_column(), 5), 0.0);
    EXPECT_EQ(p.scale(p.target_column(), 123), 0.0);
}

TEST(Scaler, TrainOnlyDiffersWhenTestRangeExceedsTrainRange) {
    std::vector<FeatureRow> rows;
    for (int k = 0; k < 10; ++k) rows.push_back(row_with_close(100 + k));  // rising: test rows exceed train max
    auto full = fit_scaler(rows, ScalerMode::full);
    auto train_only = fit_scaler(rows, ScalerMode::train_only, 0.8);
    EXPECT_EQ(full.maxes[kPredictorCount], 109);
    EXPECT_EQ(train_only.maxes[kPredictorCount], 107);
    EXPECT_EQ(train_only.mins[kPredictorCount], 100);
    auto ds = transform(rows, train_only, 0.8);
    EXPECT_GT(ds.y.back(), 1.0);  // out-of-range test targets are not clipped
}

TEST(Scaler, InverseTargetRoundTripsOnFixture) {
    const auto rows = fixture_rows();
    const auto p = fit_scaler(rows);
    const auto ds = transform(rows, p);
    const auto back = inverse_target(ds.y, p);
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_NEAR(back[i], rows[i].close, 1e-9 * std::max(1.0, rows[i].close));
}

TEST(Scaler, JsonRoundTripAndVersionCheck) {
    const auto p = fit_scaler(fixture_rows(), ScalerMode::train_only);
    EXPECT_EQ(scaler_from_json(nlohmann::json::parse(scaler_to_json(p))), p);
    auto doc = nlohmann::json::parse(scaler_to_json(p));
    doc["format_version"] = 99;
    try {
        scaler_from_json(doc);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::format_version);
    }
}

TEST(Split, FloorArithmetic) {
    EXPECT_EQ(train_rows(100, 0.8), 80u);
    EXPECT_EQ(train_rows(5, 0.8), 4u);
    EXPECT_EQ(train_rows(99, 0.8), 79u);
    EXPECT_EQ(train_rows(316, 0.8), 252u);
}

TEST(Split, ChronologicalViews) {
    std::vector<FeatureRow> rows;
    for (int k = 0; k < 99; ++k) {
        auto r = row_with_close(k);
        r.date = Date(2023, 1, 1).plus_days(k);
        rows.push_back(r);
    }
    auto ds = transform(rows, fit_scaler(rows));
    auto [tr, te] = split(ds);
    EXPECT_EQ(tr.samples(), 79u);
    EXPECT_EQ(te.samples(), 20u);
    EXPECT_EQ(te.dates.front(), Date(2023, 1, 1).plus_days(79));
    EXPECT_LT(tr.dates.back(), te.dates.front());
}

TEST(Split, TooFewSamples) {
    std::vector<FeatureRow> rows(4, row_with_close(1));
    auto ds = transform(rows, fit_scaler(rows));
    EXPECT_THROW(split(ds), Error);
}

TEST(Transform, ShapeIsSamplesByOneStepByEight) {
    const auto rows = fixture_rows();
    auto ds = transform(rows, fit_scaler(rows));
    EXPECT_EQ(ds.X.samples, 20u);
    EXPECT_EQ(ds.X.steps, 1u);
    EXPECT_EQ(ds.X.features, 8u);
    for (double x : ds.X.data) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
    }
}

TEST(Transform, RejectsScalerWithWrongColumns) {
    auto p = fit_scaler(fixture_rows());
    p.columns[0] = "Open";
    EXPECT_THROW(transform(fixture_rows(), p), Error);
}
