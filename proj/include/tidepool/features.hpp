#pragma once

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tidepool/csv.hpp"
#include "tidepool/date.hpp"
#include "tidepool/error.hpp"
#include "tidepool/ingest.hpp"
#include "tidepool/json_io.hpp"
#include "tidepool/net/tensor.hpp"
#include "tidepool/sentiment.hpp"

namespace tidepool {

inline constexpr std::size_t kPredictorCount = 8;
inline constexpr double kDefaultTrainFraction = 0.8;

/// Predictor column names in model input order, followed by the target.
inline const std::array<std::string, kPredictorCount + 1>& feature_columns() {
    static const std::array<std::string, kPredictorCount + 1> names{
        "Prev Open", "Prev High", "Prev Low", "Prev Close", "Prev Volume", "negative", "neutral", "positive", "Close"};
    return names;
}

/// Previous-day predictors for one target day plus that day's close.
struct FeatureRow {
    Date date;  // target day
    double prev_open = 0.0;
    double prev_high = 0.0;
    double prev_low = 0.0;
    double prev_close = 0.0;
    double prev_volume = 0.0;
    double negative = 1.0 / 3.0;
    double neutral = 1.0 / 3.0;
    double positive = 1.0 / 3.0;
    double close = 0.0;

    std::array<double, kPredictorCount> predictors() const {
        return {prev_open, prev_high, prev_low, prev_close, prev_volume, negative, neutral, positive};
    }

    /// Column `i` of `feature_columns()`.
    double column(std::size_t i) const { return i < kPredictorCount ? predictors()[i] : close; }

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct BuildResult {
    std::vector<FeatureRow> rows;
    std::vector<std::string> warnings;
};

/// Pairs every bar with its predecessor: row t carries bar t-1's OHLCV and the
/// sentiment recorded for bar t-1's date, and bar t's close as the target.
/// A missing sentiment date falls back to uniform scores with a warning.
inline BuildResult build_rows(std::span<const DailyBar> bars, const std::map<Date, SentimentScores>& scores) {
    if (bars.size() < 2)
        throw Error(Errc::insufficient_data, "need at least 2 bars to build features, got " + std::to_string(bars.size()));
    BuildResult out;
    out.rows.reserve(bars.size() - 1);
    for (std::size_t t = 1; t < bars.size(); ++t) {
        const auto& prev = bars[t - 1];
        const auto& cur = bars[t];
        if (!(prev.date < cur.date))
            throw Error(Errc::non_monotonic_dates, "bars must be in strictly increasing date order at " +
                                                       cur.date.to_string());
        FeatureRow row;
        row.date = cur.date;
        row.prev_open = prev.open;
        row.prev_high = prev.high;
        row.prev_low = prev.low;
        row.prev_close = prev.close;
        row.prev_volume = static_cast<double>(prev.volume);
        SentimentScores s = SentimentScores::uniform();
        if (auto it = scores.find(prev.date); it != scores.end()) {
            s = it->second;
        } else {
            out.warnings.push_back("no sentiment for " + prev.date.to_string() + "; using uniform scores for row " +
                                   cur.date.to_string());
        }
        row.negative = s.negative;
        row.neutral = s.neutral;
        row.positive = s.positive;
        row.close = cur.close;
        out.rows.push_back(row);
    }
    return out;
}

inline void write_features(std::ostream& out, std::span<const FeatureRow> rows) {
    std::vector<std::string> head{"Date"};
    for (const auto& c : feature_columns()) head.push_back(c);
    csv::write_row(out, head);
    for (const auto& r : rows) {
        std::vector<std::string> fields{r.date.to_string()};
        for (std::size_t i = 0; i <= kPredictorCount; ++i) fields.push_back(csv::format_double(r.column(i)));
        csv::write_row(out, fields);
    }
}

inline std::vector<FeatureRow> parse_features(std::string_view text, const std::string& source = "<memory>") {
    auto records = csv::parse(text, source);
    if (records.empty()) throw Error(Errc::empty_file, source + ": no header row");
    csv::Header header(records.front(), source);
    const auto c_date = header.require("Date");
    std::array<std::size_t, kPredictorCount + 1> cols{};
    for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = header.require(feature_columns()[i]);

    std::vector<FeatureRow> rows;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        std::array<double, kPredictorCount + 1> v{};
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const auto& f = detail::field_at(rec, cols[i], feature_columns()[i], source);
            auto x = csv::parse_double(f);
            if (!x || !std::isfinite(*x))
                detail::malformed(source, rec.line, feature_columns()[i] + " is not a finite number: '" + f + "'");
            v[i] = *x;
        }
        FeatureRow row{detail::date_field(rec, c_date, source, false), v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
        if (!rows.empty() && !(rows.back().date < row.date))
            throw Error(Errc::non_monotonic_dates, at_line(source, rec.line) + ": dates must increase", rec.line);
        rows.push_back(row);
    }
    return rows;
}

inline std::vector<FeatureRow> load_features(const std::string& path) {
    return parse_features(csv::read_file(path), path);
}

enum class ScalerMode { full, train_only };

inline const char* to_string(ScalerMode m) { return m == ScalerMode::full ? "full" : "train_only"; }

inline ScalerMode parse_scaler_mode(std::string_view s) {
    if (s == "full") return ScalerMode::full;
    if (s == "train_only") return ScalerMode::train_only;
    throw Error(Errc::precondition, "scaler mode must be 'full' or 'train_only', got '" + std::string(s) + "'");
}

/// Per-column min-max parameters, frozen after fitting.
struct ScalerParams {
    static constexpr int kFormatVersion = 1;

    ScalerMode mode = ScalerMode::full;
    std::vector<std::string> columns;
    std::vector<double> mins;
    std::vector<double> maxes;

    double scale(std::size_t col, double x) const {
        const double range = maxes[col] - mins[col];
        if (range == 0.0) return 0.0;
        return (x - mins[col]) / range;
    }

    double unscale(std::size_t col, double x) const { return x * (maxes[col] - mins[col]) + mins[col]; }

    std::size_t target_column() const { return kPredictorCount; }

    void check_columns() const {
        const auto& expected = feature_columns();
        bool ok = columns.size() == expected.size() && mins.size() == expected.size() && maxes.size() == expected.size();
        for (std::size_t i = 0; ok && i < expected.size(); ++i) ok = columns[i] == expected[i];
        if (!ok) throw Error(Errc::column_mismatch, "scaler columns do not match the feature layout");
    }

    friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

inline std::size_t train_rows(std::size_t samples, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error(Errc::precondition, "train fraction must lie in (0, 1)");
    return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(samples)));
}

/// Fits column ranges over all rows (`full`) or over the chronological
/// training prefix only (`train_only`).
inline ScalerParams fit_scaler(std::span<const FeatureRow> rows, ScalerMode mode = ScalerMode::full,
                               double train_fraction = kDefaultTrainFraction) {
    if (rows.empty()) throw Error(Errc::empty_input, "cannot fit a scaler on zero rows");
    std::size_t n = rows.size();
    if (mode == ScalerMode::train_only) {
        n = train_rows(rows.size(), train_fraction);
        if (n == 0) throw Error(Errc::empty_input, "training prefix is empty; cannot fit train_only scaler");
    }
    ScalerParams p;
    p.mode = mode;
    p.columns.assign(feature_columns().begin(), feature_columns().end());
    p.mins.assign(p.columns.size(), 0.0);
    p.maxes.assign(p.columns.size(), 0.0);
    for (std::size_t c = 0; c < p.columns.size(); ++c) {
        double lo = rows[0].column(c);
        double hi = lo;
        for (std::size_t r = 1; r < n; ++r) {
            const double x = rows[r].column(c);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        p.mins[c] = lo;
        p.maxes[c] = hi;
    }
    return p;
}

/// Scaled model inputs. `X` is (samples, 1, 8); `rows` keeps the unscaled source.
struct Dataset {
    net::Tensor3 X;
    std::vector<double> y;
    std::vector<Date> dates;
    std::vector<FeatureRow> rows;
    std::size_t split_index = 0;

    std::size_t samples() const { return y.size(); }
};

struct DatasetView {
    net::SequenceBatch X;
    std::span<const double> y;
    std::span<const Date> dates;
    std::span<const FeatureRow> rows;

    std::size_t samples() const { return y.size(); }
};

inline std::array<double, kPredictorCount> transform_predictors(std::span<const double, kPredictorCount> predictors,
                                                                 const ScalerParams& params) {
    params.check_columns();
    std::array<double, kPredictorCount> out{};
    for (std::size_t c = 0; c < kPredictorCount; ++c) out[c] = params.scale(c, predictors[c]);
    return out;
}

inline Dataset transform(std::span<const FeatureRow> rows, const ScalerParams& params,
                         double train_fraction = kDefaultTrainFraction) {
    params.check_columns();
    Dataset ds;
    ds.X = net::Tensor3(rows.size(), 1, kPredictorCount);
    ds.y.reserve(rows.size());
    ds.dates.reserve(rows.size());
    ds.rows.assign(rows.begin(), rows.end());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < kPredictorCount; ++c) ds.X.at(r, 0, c) = params.scale(c, rows[r].column(c));
        ds.y.push_back(params.scale(params.target_column(), rows[r].close));
        ds.dates.push_back(rows[r].date);
    }
    ds.split_index = train_rows(rows.size(), train_fraction);
    return ds;
}

inline std::vector<double> inverse_target(std::span<const double> y_scaled, const ScalerParams& params) {
    params.check_columns();
    std::vector<double> out;
    out.reserve(y_scaled.size());
    for (double v : y_scaled) out.push_back(params.unscale(params.target_column(), v));
    return out;
}

inline DatasetView view(const Dataset& ds, std::size_t begin, std::size_t end) {
    return {ds.X.view().slice(begin, end), std::span<const double>(ds.y).subspan(begin, end - begin),
            std::span<const Date>(ds.dates).subspan(begin, end - begin),
            std::span<const FeatureRow>(ds.rows).subspan(begin, end - begin)};
}

/// Chronological split at `ds.split_index`; no shuffling.
inline std::pair<DatasetView, DatasetView> split(const Dataset& ds) {
    if (ds.samples() < 5)
        throw Error(Errc::insufficient_data, "need at least 5 samples to split, got " + std::to_string(ds.samples()));
    return {view(ds, 0, ds.split_index), view(ds, ds.split_index, ds.samples())};
}

inline std::string scaler_to_json(const ScalerParams& p) {
    std::string out = "{\n";
    out += "  \"format\": \"tidepool.scaler\",\n";
    out += "  \"format_version\": " + std::to_string(ScalerParams::kFormatVersion) + ",\n";
    out += "  \"mode\": \"" + std::string(to_string(p.mode)) + "\",\n";
    out += "  \"columns\": [";
    for (std::size_t i = 0; i < p.columns.size(); ++i) out += (i ? ", " : "") + json_io::quoted(p.columns[i]);
    out += "],\n";
    out += "  \"mins\": " + json_io::number_array(p.mins) + ",\n";
    out += "  \"maxes\": " + json_io::number_array(p.maxes) + "\n";
    out += "}\n";
    return out;
}

inline ScalerParams scaler_from_json(const json_io::json& doc, const std::string& source = "<memory>") {
    json_io::require_format(doc, "tidepool.scaler", ScalerParams::kFormatVersion, source);
    ScalerParams p;
    p.mode = parse_scaler_mode(json_io::get<std::string>(doc, "mode", source));
    p.columns = json_io::get<std::vector<std::string>>(doc, "columns", source);
    p.mins = json_io::get<std::vector<double>>(doc, "mins", source);
    p.maxes = json_io::get<std::vector<double>>(doc, "maxes", source);
    for (std::size_t i = 0; i < std::min(p.mins.size(), p.maxes.size()); ++i)
        if (!(p.maxes[i] >= p.mins[i])) throw Error(Errc::malformed_row, source + ": scaler max < min");
    p.check_columns();
    return p;
}

inline ScalerParams load_scaler(const std::string& path) { return scaler_from_json(json_io::load(path), path); }

} // namespace tidepool
