#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tidepool/csv.hpp"
#include "tidepool/error.hpp"
#include "tidepool/features.hpp"
#include "tidepool/net/adam.hpp"
#include "tidepool/net/loss.hpp"
#include "tidepool/net/model.hpp"

namespace tidepool {

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 4;
    double train_fraction = kDefaultTrainFraction;
    std::uint64_t seed = 42;
    net::AdamHyper adam;
    double dropout_rate = 0.2;
    std::size_t units = 100;
    std::size_t layers = 3;
    ScalerMode scaler_mode = ScalerMode::full;
    int verbose = 0;  // 0 silent, 1 one line per epoch, 2 two-line framework-style log

    void validate() const {
        if (epochs < 1) throw Error(Errc::precondition, "epochs must be >= 1");
        if (batch_size < 1) throw Error(Errc::precondition, "batch size must be >= 1");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw Error(Errc::precondition, "train fraction must lie in (0, 1)");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error(Errc::precondition, "dropout must lie in [0, 1)");
        if (units < 1 || layers < 1) throw Error(Errc::precondition, "units and layers must be >= 1");
        if (verbose < 0 || verbose > 2) throw Error(Errc::precondition, "verbose must be 0, 1 or 2");
        if (!(adam.lr > 0.0) || !(adam.epsilon > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
            !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
            throw Error(Errc::precondition, "invalid Adam hyperparameters");
    }
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double wall_ms = 0.0;
};

struct TrainResult {
    net::ModelParams model;
    std::vector<EpochRecord> history;
};

/// Number of mini-batches per epoch, counting a final short batch.
inline std::size_t batch_count(std::size_t samples, std::size_t batch_size) {
    return (samples + batch_size - 1) / batch_size;
}

/// Eval-mode MAE in scaled space.
inline double scaled_mae(const net::ModelParams& model, const DatasetView& part) {
    auto y_hat = net::predict(part.X, model);
    return net::mae_loss(y_hat, part.y).loss;
}

namespace detail {

inline std::string whole_seconds(double ms) { return std::to_string(static_cast<long long>(std::llround(ms / 1000.0))); }

inline void log_epoch(std::ostream& log, int verbose, const EpochRecord& rec, std::size_t epochs, std::size_t batches) {
    const std::string losses =
        "loss: " + csv::format_fixed(rec.train_loss, 4) + " - val_loss: " + csv::format_fixed(rec.val_loss, 4);
    if (verbose == 1) {
        log << "Epoch " << rec.epoch << "/" << epochs << " - " << losses << '\n';
        return;
    }
    const auto per_step = static_cast<long long>(std::llround(rec.wall_ms / static_cast<double>(batches)));
    log << "Epoch " << rec.epoch << "/" << epochs << '\n'
        << batches << "/" << batches << " - " << losses << " - " << whole_seconds(rec.wall_ms) << "s - "
        << static_cast<long long>(std::llround(rec.wall_ms)) << "ms/epoch - " << per_step << "ms/step\n";
}

} // namespace detail

/// Chronological mini-batch training with Adam on the MAE loss. After every
/// epoch the eval-mode MAE on the held-out split is recorded as val_loss.
inline TrainResult train(const Dataset& ds, const TrainConfig& cfg, std::ostream* log = nullptr) {
    cfg.validate();
    if (ds.samples() == 0) throw Error(Errc::empty_dataset, "training dataset is empty");
    if (ds.split_index != train_rows(ds.samples(), cfg.train_fraction))
        throw Error(Errc::precondition, "dataset split does not match the configured train fraction");
    const auto train_part = view(ds, 0, ds.split_index);
    const auto test_part = view(ds, ds.split_index, ds.samples());
    if (train_part.samples() == 0) throw Error(Errc::empty_dataset, "training split is empty");
    if (test_part.samples() == 0) throw Error(Errc::empty_test_set, "validation split is empty");

    net::Rng rng(cfg.seed);
    TrainResult result;
    result.model = net::init_params(rng, {ds.X.features, cfg.units, cfg.layers}, cfg.dropout_rate);
    net::AdamState adam(result.model, cfg.adam);

    const std::size_t batches = batch_count(train_part.samples(), cfg.batch_size);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        double loss_sum = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t lo = b * cfg.batch_size;
            const std::size_t hi = std::min(lo + cfg.batch_size, train_part.samples());
            const auto xb = train_part.X.slice(lo, hi);
            const auto yb = train_part.y.subspan(lo, hi - lo);
            auto fwd = net::model_forward(xb, result.model, net::Mode::train, &rng);
            auto loss = net::mae_loss(fwd.y_hat, yb);
            if (!std::isfinite(loss.loss))
                throw Error(Errc::non_finite_loss, "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                                       std::to_string(b + 1) + " of " + std::to_string(batches));
            auto grads = net::model_backward(fwd.cache, loss.grad, result.model);
            net::adam_step(result.model, grads, adam);
            loss_sum += loss.loss;
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(batches);
        rec.val_loss = scaled_mae(result.model, test_part);
        if (!std::isfinite(rec.val_loss))
            throw Error(Errc::non_finite_loss, "non-finite validation loss at epoch " + std::to_string(epoch));
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        result.history.push_back(rec);
        if (log && cfg.verbose > 0) detail::log_epoch(*log, cfg.verbose, rec, cfg.epochs, batches);
    }
    return result;
}

struct CorrelationEntry {
    std::string predictor;
    std::optional<double> r;  // nullopt when the predictor (or close) has zero variance
};

/// Pearson correlation of each of the eight predictors with the target close.
inline std::vector<CorrelationEntry> correlation_report(std::span<const FeatureRow> rows) {
    if (rows.size() < 3)
        throw Error(Errc::insufficient_data, "correlation needs at least 3 rows, got " + std::to_string(rows.size()));
    const double n = static_cast<double>(rows.size());
    auto constant = [&](std::size_t c) {
        return std::all_of(rows.begin(), rows.end(), [&](const FeatureRow& r) { return r.column(c) == rows[0].column(c); });
    };
    const bool close_constant = constant(kPredictorCount);
    double mean_y = 0.0;
    for (const auto& r : rows) mean_y += r.close;
    mean_y /= n;

    std::vector<CorrelationEntry> out;
    for (std::size_t c = 0; c < kPredictorCount; ++c) {
        double mean_x = 0.0;
        for (const auto& r : rows) mean_x += r.column(c);
        mean_x /= n;
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (const auto& r : rows) {
            const double dx = r.column(c) - mean_x;
            const double dy = r.close - mean_y;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
        CorrelationEntry e{feature_columns()[c], std::nullopt};
        if (!close_constant && !constant(c)) e.r = std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
        out.push_back(std::move(e));
    }
    return out;
}

struct PredictionPoint {
    Date date;
    double actual = 0.0;
    double predicted = 0.0;
};

struct EvalReport {
    double mae_price = 0.0;
    double mae_scaled = 0.0;
    std::vector<PredictionPoint> series;
    std::vector<CorrelationEntry> pearson;  // empty with fewer than 3 rows
};

/// Eval-mode predictions on the held-out split, mapped back to prices.
inline EvalReport evaluate(const net::ModelParams& model, const Dataset& ds, const ScalerParams& scaler) {
    if (ds.split_index >= ds.samples()) throw Error(Errc::empty_test_set, "no held-out rows to evaluate");
    const auto test = view(ds, ds.split_index, ds.samples());
    const auto y_hat = net::predict(test.X, model);
    const auto predicted = inverse_target(y_hat, scaler);
    const auto actual = inverse_target(test.y, scaler);

    EvalReport rep;
    rep.mae_scaled = net::mae_loss(y_hat, test.y).loss;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        rep.series.push_back({test.dates[i], actual[i], predicted[i]});
        rep.mae_price += std::abs(predicted[i] - actual[i]);
    }
    rep.mae_price /= static_cast<double>(actual.size());
    if (ds.rows.size() >= 3) rep.pearson = correlation_report(ds.rows);
    return rep;
}

/// Next-day close from one day's eight raw predictors.
inline double predict_next(const net::ModelParams& model, std::span<const double, kPredictorCount> predictors,
                           const ScalerParams& scaler) {
    try {
        scaler.check_columns();
    } catch (const Error& e) {
        throw Error(Errc::scaler_mismatch, e.what());
    }
    if (model.dims().input_dim != kPredictorCount)
        throw Error(Errc::scaler_mismatch, "model input dimension does not match the scaler's predictor count");
    const auto scaled = transform_predictors(predictors, scaler);
    const net::SequenceBatch x(scaled, 1, 1, kPredictorCount);
    const double y = net::predict(x, model).front();
    return scaler.unscale(scaler.target_column(), y);
}

inline void write_history(std::ostream& out, std::span<const EpochRecord> history, bool record_timing) {
    csv::write_row(out, {"epoch", "train_loss", "val_loss", "wall_ms"});
    for (const auto& h : history)
        csv::write_row(out, {std::to_string(h.epoch), csv::format_double(h.train_loss), csv::format_double(h.val_loss),
                             std::to_string(record_timing ? std::llround(h.wall_ms) : 0LL)});
}

inline std::vector<EpochRecord> parse_history(std::string_view text, const std::string& source = "<memory>") {
    auto records = csv::parse(text, source);
    if (records.empty()) throw Error(Errc::empty_file, source + ": no header row");
    csv::Header header(records.front(), source);
    const std::size_t cols[4] = {header.require("epoch"), header.require("train_loss"), header.require("val_loss"),
                                 header.require("wall_ms")};
    std::vector<EpochRecord> out;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        EpochRecord e;
        e.epoch = static_cast<std::size_t>(detail::count_field(rec, cols[0], "epoch", source));
        double v[3];
        for (int k = 0; k < 3; ++k) {
            const auto& f = detail::field_at(rec, cols[k + 1], "value", source);
            auto x = csv::parse_double(f);
            if (!x || !std::isfinite(*x)) detail::malformed(source, rec.line, "not a finite number: '" + f + "'");
            v[k] = *x;
        }
        e.train_loss = v[0];
        e.val_loss = v[1];
        e.wall_ms = v[2];
        out.push_back(e);
    }
    return out;
}

inline void write_predictions(std::ostream& out, std::span<const PredictionPoint> series) {
    csv::write_row(out, {"date", "actual", "predicted"});
    for (const auto& p : series)
        csv::write_row(out, {p.date.to_string(), csv::format_double(p.actual), csv::format_double(p.predicted)});
}

inline std::vector<PredictionPoint> parse_predictions(std::string_view text, const std::string& source = "<memory>") {
    auto records = csv::parse(text, source);
    if (records.empty()) throw Error(Errc::empty_file, source + ": no header row");
    csv::Header header(records.front(), source);
    const std::size_t cols[3] = {header.require("date"), header.require("actual"), header.require("predicted")};
    std::vector<PredictionPoint> out;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        PredictionPoint p;
        p.date = detail::date_field(rec, cols[0], source, false);
        double v[2];
        for (int k = 0; k < 2; ++k) {
            const auto& f = detail::field_at(rec, cols[k + 1], "value", source);
            auto x = csv::parse_double(f);
            if (!x || !std::isfinite(*x)) detail::malformed(source, rec.line, "not a finite number: '" + f + "'");
            v[k] = *x;
        }
        p.actual = v[0];
        p.predicted = v[1];
        out.push_back(p);
    }
    return out;
}

inline constexpr int kReportFormatVersion = 1;

inline nlohmann::ordered_json config_to_json(const TrainConfig& cfg) {
    nlohmann::ordered_json j;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["train_fraction"] = cfg.train_fraction;
    j["seed"] = cfg.seed;
    j["lr"] = cfg.adam.lr;
    j["beta1"] = cfg.adam.beta1;
    j["beta2"] = cfg.adam.beta2;
    j["epsilon"] = cfg.adam.epsilon;
    j["dropout_rate"] = cfg.dropout_rate;
    j["units"] = cfg.units;
    j["layers"] = cfg.layers;
    j["scaler_mode"] = to_string(cfg.scaler_mode);
    j["verbose"] = cfg.verbose;
    return j;
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.adam.lr = j.value("lr", cfg.adam.lr);
    cfg.adam.beta1 = j.value("beta1", cfg.adam.beta1);
    cfg.adam.beta2 = j.value("beta2", cfg.adam.beta2);
    cfg.adam.epsilon = j.value("epsilon", cfg.adam.epsilon);
    cfg.dropout_rate = j.value("dropout_rate", cfg.dropout_rate);
    cfg.units = j.value("units", cfg.units);
    cfg.layers = j.value("layers", cfg.layers);
    cfg.scaler_mode = parse_scaler_mode(j.value("scaler_mode", std::string(to_string(cfg.scaler_mode))));
    cfg.verbose = j.value("verbose", cfg.verbose);
    return cfg;
}

inline std::string report_to_json(const EvalReport& rep, const TrainConfig& cfg) {
    nlohmann::ordered_json j;
    j["format"] = "tidepool.report";
    j["format_version"] = kReportFormatVersion;
    j["seed"] = cfg.seed;
    j["mae_price"] = rep.mae_price;
    j["mae_scaled"] = rep.mae_scaled;
    j["test_samples"] = rep.series.size();
    nlohmann::ordered_json pearson = nlohmann::ordered_json::object();
    for (const auto& e : rep.pearson) pearson[e.predictor] = e.r ? nlohmann::ordered_json(*e.r) : nlohmann::ordered_json(nullptr);
    j["pearson"] = pearson;
    j["config"] = config_to_json(cfg);
    return j.dump(2) + "\n";
}

} // namespace tidepool
