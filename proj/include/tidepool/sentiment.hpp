#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tidepool/csv.hpp"
#include "tidepool/date.hpp"
#include "tidepool/error.hpp"
#include "tidepool/textprep.hpp"

namespace tidepool {

/// (negative, neutral, positive) probabilities; they sum to one.
struct SentimentScores {
    double negative = 1.0 / 3.0;
    double neutral = 1.0 / 3.0;
    double positive = 1.0 / 3.0;

    static constexpr SentimentScores uniform() { return {}; }

    double sum() const { return negative + neutral + positive; }

    bool valid(double tolerance = 1e-9) const {
        auto in_unit = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
        return in_unit(negative) && in_unit(neutral) && in_unit(positive) && std::abs(sum() - 1.0) <= tolerance;
    }

    friend bool operator==(const SentimentScores&, const SentimentScores&) = default;
};

/// Numerically stable softmax over three logits (max is subtracted first).
inline std::array<double, 3> softmax(const std::array<double, 3>& logits) {
    for (double l : logits)
        if (!std::isfinite(l)) throw Error(Errc::non_finite_input, "softmax logits must be finite");
    const double top = std::max({logits[0], logits[1], logits[2]});
    std::array<double, 3> p{};
    double total = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        p[i] = std::exp(logits[i] - top);
        total += p[i];
    }
    for (double& x : p) x /= total;
    return p;
}

/// Scoring contract. Implementations must be deterministic and safe to call
/// concurrently from several threads.
class SentimentScorer {
public:
    virtual ~SentimentScorer() = default;
    virtual SentimentScores score(std::string_view text) const = 0;
};

enum class Polarity { positive, negative };

/// Weighted positive and negative term lists. Immutable once built.
class Lexicon {
public:
    Lexicon() = default;

    void add(std::string term, double weight, Polarity polarity) {
        if (term.empty()) throw Error(Errc::precondition, "lexicon term must be non-empty");
        for (char c : term)
            if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')))
                throw Error(Errc::precondition, "lexicon term '" + term + "' must match [a-z0-9]+");
        if (!std::isfinite(weight) || weight <= 0.0)
            throw Error(Errc::precondition, "lexicon weight for '" + term + "' must be finite and > 0");
        if (positive_.count(term) || negative_.count(term))
            throw Error(Errc::precondition, "lexicon term '" + term + "' listed twice");
        (polarity == Polarity::positive ? positive_ : negative_).emplace(std::move(term), weight);
    }

    /// File format: one `term,weight,polarity` per line, polarity `pos` or
    /// `neg`. Blank lines and lines starting with '#' are ignored.
    static Lexicon parse(std::string_view text, const std::string& source = "<memory>") {
        Lexicon lex;
        std::size_t line_no = 0;
        std::size_t start = 0;
        while (start < text.size()) {
            auto end = text.find('\n', start);
            if (end == std::string_view::npos) end = text.size();
            std::string_view line = text.substr(start, end - start);
            start = end + 1;
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (line.empty() || line.front() == '#') continue;

            auto c1 = line.find(',');
            auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
            if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos)
                throw Error(Errc::malformed_row, at_line(source, line_no) + ": expected term,weight,polarity", line_no);
            std::string term(line.substr(0, c1));
            auto weight = csv::parse_double(line.substr(c1 + 1, c2 - c1 - 1));
            std::string_view pol = line.substr(c2 + 1);
            if (!weight)
                throw Error(Errc::malformed_row, at_line(source, line_no) + ": weight is not a number", line_no);
            if (pol != "pos" && pol != "neg")
                throw Error(Errc::malformed_row, at_line(source, line_no) + ": polarity must be pos or neg", line_no);
            try {
                lex.add(std::move(term), *weight, pol == "pos" ? Polarity::positive : Polarity::negative);
            } catch (const Error& e) {
                throw Error(Errc::malformed_row, at_line(source, line_no) + ": " + e.what(), line_no);
            }
        }
        return lex;
    }

    static Lexicon load(const std::string& path) { return parse(csv::read_file(path), path); }

    double positive_weight(std::string_view token) const { return lookup(positive_, token); }
    double negative_weight(std::string_view token) const { return lookup(negative_, token); }
    std::size_t positive_size() const { return positive_.size(); }
    std::size_t negative_size() const { return negative_.size(); }

private:
    using Table = std::map<std::string, double, std::less<>>;

    static double lookup(const Table& table, std::string_view token) {
        auto it = table.find(token);
        return it == table.end() ? 0.0 : it->second;
    }

    Table positive_;
    Table negative_;
};

inline constexpr double kDefaultLexiconScale = 2.0;

/// Lexicon backend: logits (scale*neg/sqrt(n), 0, scale*pos/sqrt(n)) over the
/// n whitespace tokens of the text, with the neutral class as reference.
inline SentimentScores lexicon_score(std::string_view text, const Lexicon& lex, double scale = kDefaultLexiconScale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(Errc::precondition, "lexicon scale must be > 0");
    double pos_hits = 0.0;
    double neg_hits = 0.0;
    std::size_t tokens = 0;
    std::size_t i = 0;
    auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; };
    while (i < text.size()) {
        while (i < text.size() && is_ws(text[i])) ++i;
        if (i == text.size()) break;
        std::size_t j = i;
        while (j < text.size() && !is_ws(text[j])) ++j;
        auto token = text.substr(i, j - i);
        pos_hits += lex.positive_weight(token);
        neg_hits += lex.negative_weight(token);
        ++tokens;
        i = j;
    }
    const double norm = std::sqrt(static_cast<double>(std::max<std::size_t>(1, tokens)));
    auto p = softmax({scale * neg_hits / norm, 0.0, scale * pos_hits / norm});
    return {p[0], p[1], p[2]};
}

class LexiconScorer final : public SentimentScorer {
public:
    explicit LexiconScorer(Lexicon lex, double scale = kDefaultLexiconScale) : lex_(std::move(lex)), scale_(scale) {
        if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw Error(Errc::precondition, "lexicon scale must be > 0");
    }

    SentimentScores score(std::string_view text) const override { return lexicon_score(text, lex_, scale_); }

    const Lexicon& lexicon() const { return lex_; }
    double scale() const { return scale_; }

private:
    Lexicon lex_;
    double scale_;
};

struct ScoreFailure {
    Date date;
    std::string reason;
};

struct DailyScores {
    std::map<Date, SentimentScores> scores;
    std::vector<ScoreFailure> failures;
};

/// Scores each day. Empty days get uniform scores. A scorer that throws or
/// returns an invalid triple is recorded as a failure and the day is scored
/// uniform; scoring continues.
inline DailyScores score_days(std::span<const DailyTweetAggregate> days, const SentimentScorer& scorer) {
    DailyScores out;
    for (const auto& day : days) {
        if (out.scores.count(day.date))
            throw Error(Errc::precondition, "duplicate aggregate for " + day.date.to_string());
        if (day.text.find_first_not_of(' ') == std::string::npos) {
            out.scores.emplace(day.date, SentimentScores::uniform());
            continue;
        }
        try {
            auto s = scorer.score(day.text);
            if (!s.valid()) throw Error(Errc::non_finite_input, "scorer returned an invalid probability triple");
            out.scores.emplace(day.date, s);
        } catch (const std::exception& e) {
            out.failures.push_back({day.date, e.what()});
            out.scores.emplace(day.date, SentimentScores::uniform());
        }
    }
    return out;
}

inline void write_scores(std::ostream& out, const std::map<Date, SentimentScores>& scores) {
    csv::write_row(out, {"date", "negative", "neutral", "positive"});
    for (const auto& [date, s] : scores)
        csv::write_row(out, {date.to_string(), csv::format_double(s.negative), csv::format_double(s.neutral),
                             csv::format_double(s.positive)});
}

inline std::map<Date, SentimentScores> parse_scores(std::string_view text, const std::string& source = "<memory>") {
    auto records = csv::parse(text, source);
    if (records.empty()) throw Error(Errc::empty_file, source + ": no header row");
    csv::Header header(records.front(), source);
    const std::size_t cols[4] = {header.require("date"), header.require("negative"), header.require("neutral"),
                                 header.require("positive")};
    std::map<Date, SentimentScores> out;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        Date date = detail::date_field(rec, cols[0], source, false);
        double p[3];
        for (int k = 0; k < 3; ++k) {
            const auto& f = detail::field_at(rec, cols[k + 1], "probability", source);
            auto v = csv::parse_double(f);
            if (!v || !std::isfinite(*v)) detail::malformed(source, rec.line, "probability is not a number: '" + f + "'");
            p[k] = *v;
        }
        SentimentScores s{p[0], p[1], p[2]};
        if (!s.valid()) detail::malformed(source, rec.line, "scores must lie in [0,1] and sum to 1");
        if (!out.emplace(date, s).second)
            throw Error(Errc::non_monotonic_dates, at_line(source, rec.line) + ": duplicate date " + date.to_string(),
                        rec.line);
    }
    return out;
}

inline std::map<Date, SentimentScores> load_scores(const std::string& path) {
    return parse_scores(csv::read_file(path), path);
}

} // namespace tidepool
