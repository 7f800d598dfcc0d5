#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tidepool/date.hpp"
#include "tidepool/error.hpp"
#include "tidepool/ingest.hpp"
#include "tidepool/unicode.hpp"

namespace tidepool {

/// Default number of most-retweeted tweets kept per day.
inline constexpr std::size_t kDefaultTopK = 100;

struct DailyTweetAggregate {
    Date date;
    std::string text;  // cleaned tweets joined by single spaces
    std::size_t tweet_count = 0;
    std::int64_t total_retweets = 0;

    friend bool operator==(const DailyTweetAggregate&, const DailyTweetAggregate&) = default;
};

namespace detail {

inline bool is_word_char(char32_t cp) {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') || (cp >= U'0' && cp <= U'9') || cp == U'_';
}

// Removes every `marker` followed by one or more [A-Za-z0-9_], together with that run.
inline std::u32string strip_tagged(const std::u32string& text, char32_t marker) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == marker && i + 1 < text.size() && is_word_char(text[i + 1])) {
            i += 2;
            while (i < text.size() && is_word_char(text[i])) ++i;
            continue;
        }
        out.push_back(text[i++]);
    }
    return out;
}

// Removes "http" followed by one or more non-whitespace code points.
inline std::u32string strip_urls(const std::u32string& text) {
    static constexpr std::u32string_view scheme = U"http";
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::u32string_view(text).substr(i, 4) == scheme && i + 4 < text.size() && !unicode::is_space(text[i + 4])) {
            i += 5;
            while (i < text.size() && !unicode::is_space(text[i])) ++i;
            continue;
        }
        out.push_back(text[i++]);
    }
    return out;
}

} // namespace detail

/// Tweet cleaning: lowercase, drop apostrophes, drop @mentions, #hashtags and
/// http URLs, then map every code point outside [a-z0-9] to one space.
/// Whitespace is neither trimmed nor collapsed.
inline std::string clean_tweet(std::string_view raw) {
    std::u32string text;
    {
        auto decoded = unicode::decode_utf8(raw);
        text.reserve(decoded.size());
        for (char32_t cp : decoded) {
            if (cp == U'\'') continue;
            unicode::append_lower(text, cp);
        }
    }
    text = detail::strip_tagged(text, U'@');
    text = detail::strip_tagged(text, U'#');
    text = detail::strip_urls(text);

    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) {
        bool keep = (cp >= U'a' && cp <= U'z') || (cp >= U'0' && cp <= U'9');
        out.push_back(keep ? static_cast<char>(cp) : ' ');
    }
    return out;
}

/// NFKD compatibility decomposition; "café" becomes "cafe" + U+0301.
inline std::string normalize_unicode(std::string_view raw) { return unicode::nfkd(raw); }

/// Selects the `cap` most-retweeted tweets of one day (stable on ties),
/// normalizes and cleans each, and joins them with single spaces.
inline DailyTweetAggregate aggregate_day(std::span<const RawTweet> tweets, std::size_t cap = kDefaultTopK) {
    if (cap == 0) throw Error(Errc::precondition, "selection cap must be >= 1");
    DailyTweetAggregate agg;
    if (tweets.empty()) return agg;
    agg.date = tweets.front().date;
    for (const auto& t : tweets)
        if (t.date != agg.date)
            throw Error(Errc::precondition, "aggregate_day given tweets from " + agg.date.to_string() + " and " +
                                                t.date.to_string());

    std::vector<const RawTweet*> order;
    order.reserve(tweets.size());
    for (const auto& t : tweets) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(),
                     [](const RawTweet* a, const RawTweet* b) { return a->retweet_count > b->retweet_count; });
    order.resize(std::min(cap, order.size()));

    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i) agg.text.push_back(' ');
        agg.text += clean_tweet(normalize_unicode(order[i]->raw_content));
        agg.total_retweets += order[i]->retweet_count;
    }
    agg.tweet_count = order.size();
    return agg;
}

/// Groups tweets by date (file order kept within a day) and aggregates each
/// day. Output is in ascending date order.
inline std::vector<DailyTweetAggregate> aggregate_by_day(std::span<const RawTweet> tweets,
                                                         std::size_t cap = kDefaultTopK) {
    std::map<Date, std::vector<RawTweet>> by_day;
    for (const auto& t : tweets) by_day[t.date].push_back(t);
    std::vector<DailyTweetAggregate> out;
    out.reserve(by_day.size());
    for (const auto& [date, day] : by_day) out.push_back(aggregate_day(day, cap));
    return out;
}

inline void write_aggregates(std::ostream& out, std::span<const DailyTweetAggregate> days) {
    csv::write_row(out, {"date", "previous_day_tweets", "tweet_count", "total_retweets"});
    for (const auto& d : days)
        csv::write_row(out, {d.date.to_string(), d.text, std::to_string(d.tweet_count), std::to_string(d.total_retweets)});
}

inline std::vector<DailyTweetAggregate> parse_aggregates(std::string_view text, const std::string& source = "<memory>") {
    auto records = csv::parse(text, source);
    if (records.empty()) throw Error(Errc::empty_file, source + ": no header row");
    csv::Header header(records.front(), source);
    const auto c_date = header.require("date");
    const auto c_text = header.require("previous_day_tweets");
    const auto c_count = header.require("tweet_count");
    const auto c_rt = header.require("total_retweets");

    std::vector<DailyTweetAggregate> out;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        DailyTweetAggregate d;
        d.date = detail::date_field(rec, c_date, source, false);
        d.text = detail::field_at(rec, c_text, "previous_day_tweets", source);
        d.tweet_count = static_cast<std::size_t>(detail::count_field(rec, c_count, "tweet_count", source));
        d.total_retweets = detail::count_field(rec, c_rt, "total_retweets", source);
        if (!out.empty() && !(out.back().date < d.date))
            throw Error(Errc::non_monotonic_dates, at_line(source, rec.line) + ": dates must be unique and increasing",
                        rec.line);
        out.push_back(std::move(d));
    }
    return out;
}

inline std::vector<DailyTweetAggregate> load_aggregates(const std::string& path) {
    return parse_aggregates(csv::read_file(path), path);
}

} // namespace tidepool
