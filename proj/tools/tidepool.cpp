// tidepool command line: one subcommand per pipeline stage, plus `pipeline`
// which runs clean -> sentiment -> features -> train -> eval in order.

#include <algorithm>
#include <functional>
#include <iostream>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include "CLI11.hpp"
#endif
#include "commands.hpp"

#ifndef TIDEPOOL_DEFAULT_LEXICON
#define TIDEPOOL_DEFAULT_LEXICON "data/lexicon.csv"
#endif

namespace {

using namespace tidepool;
using tidepool::cli::RunConfig;

enum Exit : int { ok = 0, usage = 1, data = 2, numerical = 3 };

void add_run_flags(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--config", "Read flags from a TOML/INI file (command line wins)")->check(CLI::ExistingFile);
    sub->add_option("--ticker", cfg.ticker, "Ticker symbol used in plot titles");
    sub->add_option("--bars", cfg.bars, "Daily price bars CSV");
    sub->add_option("--tweets", cfg.tweets, "Tweets CSV");
    sub->add_option("--workdir", cfg.workdir, "Directory holding the stage artifacts")->envname("TIDEPOOL_WORKDIR");
    sub->add_option("--lexicon", cfg.lexicon, "Sentiment lexicon CSV (term,weight,polarity)");
    sub->add_option("--top-k", cfg.top_k, "Tweets kept per day, by retweet count")->check(CLI::PositiveNumber);
    sub->add_option("--lexicon-scale", cfg.lexicon_scale, "Logit scale of the lexicon scorer")
        ->check(CLI::PositiveNumber);
    sub->add_option("--epochs", cfg.train.epochs, "Training epochs")->check(CLI::PositiveNumber);
    sub->add_option("--batch-size", cfg.train.batch_size, "Samples per batch")->check(CLI::PositiveNumber);
    sub->add_option("--train-fraction", cfg.train.train_fraction, "Chronological train share")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", cfg.train.seed, "RNG seed for init and dropout (train and pipeline require it)");
    sub->add_option("--lr", cfg.train.adam.lr, "Adam learning rate")->check(CLI::PositiveNumber);
    sub->add_option("--beta1", cfg.train.adam.beta1, "Adam first-moment decay");
    sub->add_option("--beta2", cfg.train.adam.beta2, "Adam second-moment decay");
    sub->add_option("--epsilon", cfg.train.adam.epsilon, "Adam epsilon");
    sub->add_option("--dropout", cfg.train.dropout_rate, "Dropout rate after each LSTM layer")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--units", cfg.train.units, "LSTM units per layer")->check(CLI::PositiveNumber);
    sub->add_option("--layers", cfg.train.layers, "Stacked LSTM layers")->check(CLI::PositiveNumber);
    sub->add_option("--scaler-mode", cfg.scaler_mode, "Scaler fit rows")->check(CLI::IsMember({"full", "train_only"}));
    sub->add_option("--verbose", cfg.train.verbose, "0 silent, 1 one line per epoch, 2 two lines per epoch")
        ->check(CLI::Range(0, 2));
    sub->add_flag("--record-timing", cfg.record_timing, "Write measured wall_ms into history.csv");
}

// CLI11 only reads config files for the root app, so subcommands apply theirs
// here. Keys may sit at the top level or under a [<subcommand>] section.
void apply_config(CLI::App* sub) {
    auto* opt = sub->get_option("--config");
    if (opt->count() == 0) return;
    const auto path = opt->as<std::string>();
    for (const auto& item : CLI::ConfigTOML().from_file(path)) {
        if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub->get_name())) continue;
        if (item.name == "++" || item.name == "--") continue;  // section markers
        std::string flag = "--" + item.name;
        std::replace(flag.begin(), flag.end(), '_', '-');
        CLI::Option* target = nullptr;
        try {
            target = sub->get_option(flag);
        } catch (const CLI::OptionNotFound&) {
            throw CLI::ConfigError::Extras(item.name);
        }
        if (flag == "--config") continue;
        if (target->count() > 0) continue;  // command line wins
        target->add_result(item.inputs);
        target->run_callback();
    }
}

int run(int argc, char** argv) {
    RunConfig cfg;
    cfg.lexicon = TIDEPOOL_DEFAULT_LEXICON;
    cfg.train.verbose = 2;

    CLI::App app{"tidepool: next-day close forecasting from prices and tweet sentiment"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", "tidepool 1.0.0");

    struct Command {
        const char* name;
        const char* help;
        std::function<void()> action;
    };
    std::ostream& out = std::cout;
    std::ostream& err = std::cerr;
    const std::vector<Command> commands = {
        {"clean", "Aggregate and clean tweets per day -> clean.csv", [&] { cli::cmd_clean(cfg, out); }},
        {"sentiment", "Score each day's text -> sentiment.csv", [&] { cli::cmd_sentiment(cfg, out, err); }},
        {"features", "Join bars with sentiment -> features.csv", [&] { cli::cmd_features(cfg, out, err); }},
        {"train", "Fit scaler and LSTM -> model.json, scaler.json, history.csv", [&] { cli::cmd_train(cfg, out); }},
        {"eval", "Evaluate on the test split -> predictions.csv, report.json", [&] { cli::cmd_eval(cfg, out); }},
        {"predict", "Predict the next close from the last bar or --row", [&] { cli::cmd_predict(cfg, out); }},
        {"plot", "Render <kind>.svg and <kind>_points.csv", [&] { cli::cmd_plot(cfg, out); }},
        {"pipeline", "Run clean, sentiment, features, train and eval",
         [&] {
             cli::cmd_clean(cfg, out);
             cli::cmd_sentiment(cfg, out, err);
             cli::cmd_features(cfg, out, err);
             cli::cmd_train(cfg, out);
             cli::cmd_eval(cfg, out);
         }},
        {"echo-config", "Print the resolved configuration as JSON", [&] { out << cfg.to_json().dump(2) << '\n'; }},
    };

    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_run_flags(sub, cfg);
        if (std::string(c.name) == "clean") sub->alias("textprep");
        if (std::string(c.name) == "plot")
            sub->add_option("--kind", cfg.plot_kind, "Chart kind")
                ->check(CLI::IsMember({"loss", "prediction", "sentiment_rate"}));
        if (std::string(c.name) == "predict")
            sub->add_option("--row", cfg.row, "Eight comma-separated predictors (Open..positive)");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
        for (auto* sub : subs)
            if (sub->parsed()) apply_config(sub);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? Exit::ok : Exit::usage;
    }

    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        const std::string name = commands[i].name;
        try {
            if ((name == "train" || name == "pipeline") && subs[i]->get_option("--seed")->count() == 0) {
                err << "error: " << name << " needs --seed (on the command line or in --config)\n";
                return Exit::usage;
            }
            cfg.finalize();
            commands[i].action();
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            if (e.is_numerical()) return Exit::numerical;
            return e.code() == Errc::precondition ? Exit::usage : Exit::data;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return Exit::data;
        }
        return Exit::ok;
    }
    return Exit::usage;
}

} // namespace

int main(int argc, char** argv) { return run(argc, argv); }
