#pragma once

// Pipeline stages behind the `tidepool` subcommands. Each stage reads the
// artifacts of the previous one from the work directory and writes its own.

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tidepool/tidepool.hpp"

namespace tidepool::cli {

namespace fs = std::filesystem;

struct RunConfig {
    std::string ticker;
    std::string bars;
    std::string tweets;
    std::string workdir = "work";
    std::string lexicon;
    std::size_t top_k = kDefaultTopK;
    double lexicon_scale = kDefaultLexiconScale;
    TrainConfig train;
    std::string scaler_mode = "full";
    bool record_timing = false;
    std::string plot_kind = "loss";
    std::string row;  // explicit predictors for `predict`

    /// Folds the string-typed fields into `train` and validates everything.
    void finalize() {
        train.scaler_mode = parse_scaler_mode(scaler_mode);
        train.validate();
        if (!ticker.empty()) (void)Ticker(ticker);
        if (top_k < 1) throw Error(Errc::precondition, "--top-k must be >= 1");
        if (!(lexicon_scale > 0.0)) throw Error(Errc::precondition, "--lexicon-scale must be > 0");
        if (workdir.empty()) throw Error(Errc::precondition, "--workdir must not be empty");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["ticker"] = ticker;
        j["bars"] = bars;
        j["tweets"] = tweets;
        j["workdir"] = workdir;
        j["lexicon"] = lexicon;
        j["top_k"] = top_k;
        j["lexicon_scale"] = lexicon_scale;
        j["record_timing"] = record_timing;
        j["plot_kind"] = plot_kind;
        j["train"] = config_to_json(train);
        return j;
    }
};

namespace artifact {
inline constexpr const char* clean = "clean.csv";
inline constexpr const char* sentiment = "sentiment.csv";
inline constexpr const char* features = "features.csv";
inline constexpr const char* model = "model.json";
inline constexpr const char* scaler = "scaler.json";
inline constexpr const char* history = "history.csv";
inline constexpr const char* predictions = "predictions.csv";
inline constexpr const char* report = "report.json";
} // namespace artifact

inline std::string in_workdir(const RunConfig& cfg, const char* name) { return (fs::path(cfg.workdir) / name).string(); }

inline std::string require_artifact(const RunConfig& cfg, const char* name, const char* producer) {
    auto path = in_workdir(cfg, name);
    if (!fs::exists(path))
        throw Error(Errc::missing_artifact,
                    "missing " + std::string(name) + " at '" + path + "' (run `tidepool " + producer + "` first)");
    return path;
}

inline std::string require_input(const std::string& path, const char* flag) {
    if (path.empty()) throw Error(Errc::precondition, std::string("missing required flag ") + flag);
    if (!fs::exists(path)) throw Error(Errc::missing_artifact, "input file '" + path + "' does not exist");
    return path;
}

inline void write_text(const std::string& path, const std::string& text) {
    fs::create_directories(fs::path(path).parent_path());
    auto out = csv::open_output(path);
    out << text;
    if (!out) throw Error(Errc::io, "failed writing '" + path + "'");
}

template <class Fn>
void write_with(const std::string& path, Fn&& fn) {
    std::ostringstream buf;
    fn(buf);
    write_text(path, buf.str());
}

inline std::string titled(const std::string& base, const RunConfig& cfg) {
    return cfg.ticker.empty() ? base : base + " (" + cfg.ticker + ")";
}

inline void cmd_clean(const RunConfig& cfg, std::ostream& out) {
    auto tweets = load_tweets(require_input(cfg.tweets, "--tweets"));
    auto days = aggregate_by_day(tweets, cfg.top_k);
    write_with(in_workdir(cfg, artifact::clean), [&](std::ostream& o) { write_aggregates(o, days); });
    out << "clean: " << tweets.size() << " tweets -> " << days.size() << " days -> "
        << in_workdir(cfg, artifact::clean) << '\n';
}

inline void cmd_sentiment(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto days = load_aggregates(require_artifact(cfg, artifact::clean, "clean"));
    LexiconScorer scorer(Lexicon::load(require_input(cfg.lexicon, "--lexicon")), cfg.lexicon_scale);
    auto scored = score_days(days, scorer);
    for (const auto& f : scored.failures) err << "warning: scoring failed for " << f.date.to_string() << ": " << f.reason << '\n';
    write_with(in_workdir(cfg, artifact::sentiment), [&](std::ostream& o) { write_scores(o, scored.scores); });
    out << "sentiment: " << scored.scores.size() << " days scored (" << scored.failures.size() << " failures) -> "
        << in_workdir(cfg, artifact::sentiment) << '\n';
}

inline void cmd_features(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto bars = load_bars(require_input(cfg.bars, "--bars"));
    auto scores = load_scores(require_artifact(cfg, artifact::sentiment, "sentiment"));
    auto built = build_rows(bars, scores);
    for (const auto& w : built.warnings) err << "warning: " << w << '\n';
    write_with(in_workdir(cfg, artifact::features), [&](std::ostream& o) { write_features(o, built.rows); });
    out << "features: " << built.rows.size() << " rows (" << built.warnings.size() << " without sentiment) -> "
        << in_workdir(cfg, artifact::features) << '\n';
}

inline void cmd_train(const RunConfig& cfg, std::ostream& out) {
    auto rows = load_features(require_artifact(cfg, artifact::features, "features"));
    if (rows.empty()) throw Error(Errc::empty_dataset, in_workdir(cfg, artifact::features) + " has no rows");
    auto scaler = fit_scaler(rows, cfg.train.scaler_mode, cfg.train.train_fraction);
    auto ds = transform(rows, scaler, cfg.train.train_fraction);
    auto result = train(ds, cfg.train, &out);

    const auto train_json = config_to_json(cfg.train);
    write_text(in_workdir(cfg, artifact::model), net::model_to_json(result.model, cfg.train.seed, &train_json));
    write_text(in_workdir(cfg, artifact::scaler), scaler_to_json(scaler));
    write_with(in_workdir(cfg, artifact::history),
               [&](std::ostream& o) { write_history(o, result.history, cfg.record_timing); });
    out << "train: " << result.history.size() << " epochs, final loss "
        << csv::format_fixed(result.history.back().train_loss, 4) << ", val_loss "
        << csv::format_fixed(result.history.back().val_loss, 4) << " -> " << in_workdir(cfg, artifact::model) << '\n';
}

struct LoadedModel {
    net::SavedModel saved;
    TrainConfig train;
    ScalerParams scaler;
};

inline LoadedModel load_trained(const RunConfig& cfg) {
    const auto model_path = require_artifact(cfg, artifact::model, "train");
    const auto scaler_path = require_artifact(cfg, artifact::scaler, "train");
    auto doc = json_io::load(model_path);
    LoadedModel m{net::model_from_json(doc, model_path), cfg.train, load_scaler(scaler_path)};
    if (doc.contains("train_config")) m.train = config_from_json(doc.at("train_config"));
    return m;
}

inline void cmd_eval(const RunConfig& cfg, std::ostream& out) {
    auto m = load_trained(cfg);
    auto rows = load_features(require_artifact(cfg, artifact::features, "features"));
    auto ds = transform(rows, m.scaler, m.train.train_fraction);
    auto rep = evaluate(m.saved.params, ds, m.scaler);
    write_with(in_workdir(cfg, artifact::predictions), [&](std::ostream& o) { write_predictions(o, rep.series); });
    write_text(in_workdir(cfg, artifact::report), report_to_json(rep, m.train));
    out << "eval: MAE " << csv::format_fixed(rep.mae_price, 4) << " over " << rep.series.size() << " test days -> "
        << in_workdir(cfg, artifact::report) << '\n';
}

inline std::array<double, kPredictorCount> parse_row(const std::string& text) {
    std::array<double, kPredictorCount> v{};
    std::size_t k = 0, start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        if (k == kPredictorCount) throw Error(Errc::precondition, "--row takes exactly 8 comma-separated numbers");
        auto x = csv::parse_double(std::string_view(text).substr(start, end - start));
        if (!x || !std::isfinite(*x)) throw Error(Errc::precondition, "--row value is not a finite number");
        v[k++] = *x;
        start = end + 1;
    }
    if (k != kPredictorCount) throw Error(Errc::precondition, "--row takes exactly 8 comma-separated numbers");
    return v;
}

inline void cmd_predict(const RunConfig& cfg, std::ostream& out) {
    auto m = load_trained(cfg);
    std::array<double, kPredictorCount> predictors{};
    std::string basis;
    if (!cfg.row.empty()) {
        predictors = parse_row(cfg.row);
        basis = "given predictors";
    } else {
        auto bars = load_bars(require_input(cfg.bars, "--bars"));
        const auto& last = bars.back();
        auto s = SentimentScores::uniform();
        const auto sent_path = in_workdir(cfg, artifact::sentiment);
        if (fs::exists(sent_path)) {
            auto scores = load_scores(sent_path);
            if (auto it = scores.find(last.date); it != scores.end()) s = it->second;
        }
        predictors = {last.open, last.high, last.low, last.close, static_cast<double>(last.volume),
                      s.negative, s.neutral, s.positive};
        basis = "bar of " + last.date.to_string();
    }
    const double price = predict_next(m.saved.params, predictors, m.scaler);
    out << "predict: next close " << csv::format_fixed(price, 4) << " (from " << basis << ")\n";
}

inline void cmd_plot(const RunConfig& cfg, std::ostream& out) {
    plot::Chart chart;
    if (cfg.plot_kind == "loss") {
        auto path = require_artifact(cfg, artifact::history, "train");
        auto history = parse_history(csv::read_file(path), path);
        chart = plot::loss_chart(history, titled("Train loss and test loss", cfg));
    } else if (cfg.plot_kind == "prediction") {
        auto path = require_artifact(cfg, artifact::predictions, "eval");
        auto series = parse_predictions(csv::read_file(path), path);
        chart = plot::prediction_chart(series, titled("Actual vs Predicted", cfg));
    } else if (cfg.plot_kind == "sentiment_rate") {
        auto scores = load_scores(require_artifact(cfg, artifact::sentiment, "sentiment"));
        chart = plot::sentiment_rate_chart(scores, titled("Positive / negative rate", cfg));
    } else {
        throw Error(Errc::precondition, "--kind must be loss, prediction or sentiment_rate");
    }
    const auto svg_path = in_workdir(cfg, (cfg.plot_kind + ".svg").c_str());
    const auto csv_path = in_workdir(cfg, (cfg.plot_kind + "_points.csv").c_str());
    write_text(svg_path, plot::render_svg(chart));
    write_text(csv_path, plot::points_csv(chart));
    out << "plot: " << chart.points() << " points -> " << svg_path << '\n';
}

} // namespace tidepool::cli
