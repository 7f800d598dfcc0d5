#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "support.hpp"
#include "tidepool/ingest.hpp"
#include "tidepool/sentiment.hpp"
#include "tidepool/textprep.hpp"

using namespace tidepool;
namespace ts = testing_support;

namespace {

// Extended-precision softmax, rounded to double at the end.
std::array<double, 3> softmax_oracle(const std::array<double, 3>& l) {
    long double top = std::max({l[0], l[1], l[2]});
    long double e[3], s = 0.0L;
    for (int i = 0; i < 3; ++i) s += e[i] = expl(static_cast<long double>(l[i]) - top);
    return {static_cast<double>(e[0] / s), static_cast<double>(e[1] / s), static_cast<double>(e[2] / s)};
}

const Lexicon& bundled() {
    static const Lexicon lex = Lexicon::load(ts::lexicon_path());
    return lex;
}

class ThrowingScorer final : public SentimentScorer {
public:
    SentimentScores score(std::string_view text) const override {
        if (text.find("boom") != std::string_view::npos) throw std::runtime_error("scorer exploded");
        return {0.2, 0.3, 0.5};
    }
};

DailyTweetAggregate day(Date d, std::string text) {
    DailyTweetAggregate a;
    a.date = d;
    a.text = std::move(text);
    return a;
}

} // namespace

TEST(Softmax, AnalyticCases) {
    auto p = softmax({0, 0, 0});
    for (double x : p) EXPECT_DOUBLE_EQ(x, 1.0 / 3.0);
    p = softmax({std::log(2.0), 0, 0});
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(p[1], 0.25, 1e-15);
    EXPECT_NEAR(p[2], 0.25, 1e-15);
}

TEST(Softmax, LargeLogitDoesNotOverflow) {
    auto p = softmax({1000, 0, 0});
    auto q = softmax_oracle({1000, 0, 0});
    for (int i = 0; i < 3; ++i) {
        EXPECT_TRUE(std::isfinite(p[i]));
        EXPECT_EQ(p[i], q[i]);
    }
    EXPECT_EQ(p[0], 1.0);
}

TEST(Softmax, MatchesExtendedPrecisionOracle) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-30, 30);
    for (int k = 0; k < 1000; ++k) {
        std::array<double, 3> l{u(gen), u(gen), u(gen)};
        auto p = softmax(l);
        auto q = softmax_oracle(l);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], q[i], 1e-15);
    }
}

TEST(Softmax, RejectsNonFinite) { EXPECT_THROW(softmax({NAN, 0, 0}), Error); }

TEST(Lexicon, ParseAndLookup) {
    auto lex = Lexicon::parse("# comment\ngood,1.0,pos\n\nbad,2.5,neg\r\n");
    EXPECT_EQ(lex.positive_weight("good"), 1.0);
    EXPECT_EQ(lex.negative_weight("bad"), 2.5);
    EXPECT_EQ(lex.positive_weight("bad"), 0.0);
    EXPECT_EQ(lex.positive_size(), 1u);
}

TEST(Lexicon, RejectsOverlapsAndBadRows) {
    EXPECT_THROW(Lexicon::parse("good,1,pos\ngood,1,neg\n"), Error);
    EXPECT_THROW(Lexicon::parse("good,1,meh\n"), Error);
    EXPECT_THROW(Lexicon::parse("Good,1,pos\n"), Error);
    EXPECT_THROW(Lexicon::parse("good,-1,pos\n"), Error);
    EXPECT_THROW(Lexicon::parse("good,1\n"), Error);
}

TEST(Lexicon, BundledListsAreDisjointAndNonEmpty) {
    EXPECT_GT(bundled().positive_size(), 100u);
    EXPECT_GT(bundled().negative_size(), 100u);
}

TEST(LexiconScore, EmptyIsUniform) {
    auto s = lexicon_score("", bundled());
    EXPECT_DOUBLE_EQ(s.negative, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(s.positive, 1.0 / 3.0);
}

TEST(LexiconScore, PositiveOnlyTextHasPositiveArgmax) {
    auto s = lexicon_score("surge rally profit", bundled());
    EXPECT_GT(s.positive, s.neutral);
    EXPECT_GT(s.positive, s.negative);
    EXPECT_TRUE(s.valid());
}

TEST(LexiconScore, GoldenSentence) {
    const auto g = nlohmann::json::parse(ts::slurp(ts::fixture("sentence_golden.json")));
    auto s = lexicon_score(clean_tweet(g.at("text").get<std::string>()), bundled(), g.at("scale").get<double>());
    const auto want = g.at("scores").get<std::vector<double>>();
    EXPECT_NEAR(s.negative, want[0], 1e-15);
    EXPECT_NEAR(s.neutral, want[1], 1e-15);
    EXPECT_NEAR(s.positive, want[2], 1e-15);
}

TEST(LexiconScore, MonotoneInPositiveHits) {
    double last = 0.0;
    std::string text = "the";
    for (int k = 0; k < 6; ++k) {
        auto s = lexicon_score(text, bundled());
        EXPECT_GT(s.positive, last);
        last = s.positive;
        text += " gain";
    }
}

TEST(ScoreDays, ValidTriplesAndEmptyDay) {
    LexiconScorer scorer(bundled());
    std::vector<DailyTweetAggregate> days{day(Date(2023, 1, 2), "great rally"), day(Date(2023, 1, 3), "crash fear"),
                                          day(Date(2023, 1, 4), "   ")};
    auto out = score_days(days, scorer);
    ASSERT_EQ(out.scores.size(), 3u);
    for (const auto& [d, s] : out.scores) EXPECT_NEAR(s.sum(), 1.0, 1e-9);
    EXPECT_EQ(out.scores.at(Date(2023, 1, 4)), SentimentScores::uniform());
    EXPECT_TRUE(out.failures.empty());
}

TEST(ScoreDays, ScorerFailureIsRecordedAndScoredUniform) {
    std::vector<DailyTweetAggregate> days{day(Date(2023, 1, 2), "fine"), day(Date(2023, 1, 3), "boom")};
    auto out = score_days(days, ThrowingScorer{});
    ASSERT_EQ(out.failures.size(), 1u);
    EXPECT_EQ(out.failures[0].date, Date(2023, 1, 3));
    EXPECT_EQ(out.scores.at(Date(2023, 1, 3)), SentimentScores::uniform());
    EXPECT_EQ(out.scores.at(Date(2023, 1, 2)).positive, 0.5);
}

TEST(ScoreDays, FixtureMonthMatchesGoldenTable) {
    auto days = aggregate_by_day(load_tweets(ts::fixture("tweets_month.csv")));
    auto out = score_days(days, LexiconScorer(bundled()));
    auto golden = load_scores(ts::fixture("sentiment_golden.csv"));
    ASSERT_EQ(out.scores.size(), golden.size());
    for (const auto& [d, want] : golden) {
        const auto& got = out.scores.at(d);
        EXPECT_NEAR(got.negative, want.negative, 1e-15) << d.to_string();
        EXPECT_NEAR(got.neutral, want.neutral, 1e-15) << d.to_string();
        EXPECT_NEAR(got.positive, want.positive, 1e-15) << d.to_string();
    }
}

TEST(ScoreCsv, RoundTripIsExactAndValidated) {
    std::map<Date, SentimentScores> m{{Date(2023, 1, 2), {0.1, 0.2, 0.7}}, {Date(2023, 1, 3), SentimentScores::uniform()}};
    std::ostringstream out;
    write_scores(out, m);
    EXPECT_EQ(parse_scores(out.str()), m);
    EXPECT_THROW(parse_scores("date,negative,neutral,positive\n2023-01-02,0.5,0.5,0.5\n"), Error);
}
