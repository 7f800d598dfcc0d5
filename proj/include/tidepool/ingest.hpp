#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "tidepool/csv.hpp"
#include "tidepool/date.hpp"
#include "tidepool/error.hpp"

namespace tidepool {

/// One trading day of OHLCV data for a single ticker.
struct DailyBar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    std::optional<double> adj_close;  // parsed, never used as a predictor
    std::int64_t volume = 0;

    friend bool operator==(const DailyBar&, const DailyBar&) = default;
};

struct RawTweet {
    Date date;
    std::string raw_content;
    std::int64_t retweet_count = 0;
    std::int64_t view_count = 0;
    std::vector<std::string> hashtags;

    friend bool operator==(const RawTweet&, const RawTweet&) = default;
};

/// Exchange symbol, e.g. "AAPL". 1-8 characters from [A-Z0-9.].
class Ticker {
public:
    explicit Ticker(std::string symbol) : symbol_(std::move(symbol)) {
        bool ok = !symbol_.empty() && symbol_.size() <= 8 &&
                  std::all_of(symbol_.begin(), symbol_.end(), [](char c) {
                      return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.';
                  });
        if (!ok) throw Error(Errc::precondition, "invalid ticker symbol '" + symbol_ + "'");
    }

    const std::string& symbol() const { return symbol_; }
    friend bool operator==(const Ticker&, const Ticker&) = default;

private:
    std::string symbol_;
};

namespace detail {

inline std::string row_context(const std::string& source, std::size_t line) { return at_line(source, line); }

[[noreturn]] inline void malformed(const std::string& source, std::size_t line, const std::string& reason) {
    throw Error(Errc::malformed_row, row_context(source, line) + ": " + reason, line);
}

inline const std::string& field_at(const csv::Record& rec, std::size_t idx, std::string_view name,
                                   const std::string& source) {
    if (idx >= rec.fields.size())
        malformed(source, rec.line, "missing field '" + std::string(name) + "'");
    return rec.fields[idx];
}

inline double price_field(const csv::Record& rec, std::size_t idx, std::string_view name,
                          const std::string& source) {
    const auto& text = field_at(rec, idx, name, source);
    auto value = csv::parse_double(text);
    if (!value) malformed(source, rec.line, std::string(name) + " is not a number: '" + text + "'");
    if (!std::isfinite(*value) || *value <= 0.0)
        malformed(source, rec.line, std::string(name) + " must be finite and > 0");
    return *value;
}

inline std::int64_t count_field(const csv::Record& rec, std::size_t idx, std::string_view name,
                                const std::string& source) {
    const auto& text = field_at(rec, idx, name, source);
    auto value = csv::parse_int(text);
    if (!value) malformed(source, rec.line, std::string(name) + " is not an integer: '" + text + "'");
    if (*value < 0) malformed(source, rec.line, std::string(name) + " must be >= 0");
    return *value;
}

inline Date date_field(const csv::Record& rec, std::size_t idx, const std::string& source, bool allow_time) {
    std::string_view text = field_at(rec, idx, "date", source);
    // Timestamps such as "2022-04-05 13:01:22+00:00" are assigned to their written calendar day.
    if (allow_time && text.size() > 10 && (text[10] == ' ' || text[10] == 'T')) text = text.substr(0, 10);
    auto date = Date::parse(text);
    if (!date) malformed(source, rec.line, "invalid date '" + std::string(text) + "'");
    return *date;
}

} // namespace detail

/// Parses a stock CSV (`Date,Open,High,Low,Close[,Adj Close],Volume`).
inline std::vector<DailyBar> parse_bars(std::string_view text, const std::string& source = "<memory>") {
    auto records = csv::parse(text, source);
    if (records.empty()) throw Error(Errc::empty_file, source + ": no header row");
    csv::Header header(records.front(), source);
    const auto c_date = header.require("Date");
    const auto c_open = header.require("Open");
    const auto c_high = header.require("High");
    const auto c_low = header.require("Low");
    const auto c_close = header.require("Close");
    const auto c_adj = header.find("Adj Close");
    const auto c_volume = header.require("Volume");

    std::vector<DailyBar> bars;
    bars.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        DailyBar bar;
        bar.date = detail::date_field(rec, c_date, source, false);
        bar.open = detail::price_field(rec, c_open, "Open", source);
        bar.high = detail::price_field(rec, c_high, "High", source);
        bar.low = detail::price_field(rec, c_low, "Low", source);
        bar.close = detail::price_field(rec, c_close, "Close", source);
        if (c_adj) bar.adj_close = detail::price_field(rec, *c_adj, "Adj Close", source);
        bar.volume = detail::count_field(rec, c_volume, "Volume", source);

        if (bar.low > bar.high) detail::malformed(source, rec.line, "low exceeds high");
        if (bar.open < bar.low || bar.open > bar.high) detail::malformed(source, rec.line, "open outside [low, high]");
        if (bar.close < bar.low || bar.close > bar.high)
            detail::malformed(source, rec.line, "close outside [low, high]");
        if (!bars.empty() && !(bars.back().date < bar.date))
            throw Error(Errc::non_monotonic_dates,
                        detail::row_context(source, rec.line) + ": date " + bar.date.to_string() +
                            " does not follow " + bars.back().date.to_string(),
                        rec.line);
        bars.push_back(std::move(bar));
    }
    if (bars.empty()) throw Error(Errc::empty_file, source + ": no data rows");
    return bars;
}

inline std::vector<DailyBar> load_bars(const std::string& path) { return parse_bars(csv::read_file(path), path); }

/// Writes bars in the stock CSV format. The `Adj Close` column is emitted only
/// when every bar carries one.
inline void write_bars(std::ostream& out, const std::vector<DailyBar>& bars) {
    const bool with_adj =
        !bars.empty() && std::all_of(bars.begin(), bars.end(), [](const DailyBar& b) { return b.adj_close.has_value(); });
    std::vector<std::string> head{"Date", "Open", "High", "Low", "Close"};
    if (with_adj) head.emplace_back("Adj Close");
    head.emplace_back("Volume");
    csv::write_row(out, head);
    for (const auto& b : bars) {
        std::vector<std::string> row{b.date.to_string(), csv::format_double(b.open), csv::format_double(b.high),
                                     csv::format_double(b.low), csv::format_double(b.close)};
        if (with_adj) row.push_back(csv::format_double(*b.adj_close));
        row.push_back(std::to_string(b.volume));
        csv::write_row(out, row);
    }
}

inline std::vector<std::string> split_hashtags(std::string_view field) {
    std::vector<std::string> tags;
    std::size_t start = 0;
    while (start <= field.size()) {
        auto end = field.find(';', start);
        if (end == std::string_view::npos) end = field.size();
        if (end > start) tags.emplace_back(field.substr(start, end - start));
        start = end + 1;
    }
    return tags;
}

/// Parses a tweet CSV (`date,rawContent,retweetCount,viewCount,hashtags`).
/// File order is preserved. Missing or empty `viewCount` reads as 0.
inline std::vector<RawTweet> parse_tweets(std::string_view text, const std::string& source = "<memory>") {
    auto records = csv::parse(text, source);
    if (records.empty()) throw Error(Errc::empty_file, source + ": no header row");
    csv::Header header(records.front(), source);
    const auto c_date = header.require("date");
    const auto c_content = header.require("rawContent");
    const auto c_retweets = header.require("retweetCount");
    const auto c_views = header.find("viewCount");
    const auto c_tags = header.require("hashtags");

    std::vector<RawTweet> tweets;
    tweets.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        RawTweet tweet;
        tweet.date = detail::date_field(rec, c_date, source, true);
        tweet.raw_content = detail::field_at(rec, c_content, "rawContent", source);
        tweet.retweet_count = detail::count_field(rec, c_retweets, "retweetCount", source);
        if (c_views && *c_views < rec.fields.size() && !rec.fields[*c_views].empty())
            tweet.view_count = detail::count_field(rec, *c_views, "viewCount", source);
        tweet.hashtags = split_hashtags(detail::field_at(rec, c_tags, "hashtags", source));
        tweets.push_back(std::move(tweet));
    }
    return tweets;
}

inline std::vector<RawTweet> load_tweets(const std::string& path) {
    return parse_tweets(csv::read_file(path), path);
}

} // namespace tidepool
