#pragma once

// Static SVG line charts for training history, predictions and daily
// sentiment. Output depends only on the input values (byte-stable).

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "tidepool/csv.hpp"
#include "tidepool/error.hpp"
#include "tidepool/sentiment.hpp"
#include "tidepool/train_eval.hpp"

namespace tidepool::plot {

struct Series {
    std::string name;
    std::string color;
    std::vector<double> values;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<std::string> x_ticks;  // one label per point
    std::vector<Series> series;

    std::size_t points() const { return x_ticks.size(); }
};

namespace detail {

inline std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

inline std::string num(double v) { return csv::format_fixed(v, 2); }

} // namespace detail

inline void check(const Chart& chart) {
    if (chart.points() == 0 || chart.series.empty()) throw Error(Errc::empty_series, "nothing to plot for '" + chart.title + "'");
    for (const auto& s : chart.series) {
        if (s.values.size() != chart.points())
            throw Error(Errc::shape_mismatch, "series '" + s.name + "' length differs from the x axis");
        for (double v : s.values)
            if (!std::isfinite(v)) throw Error(Errc::non_finite_input, "series '" + s.name + "' has a non-finite value");
    }
}

inline std::string render_svg(const Chart& chart) {
    check(chart);
    constexpr double width = 800, height = 450;
    constexpr double left = 70, right = 20, top = 40, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double lo = chart.series.front().values.front();
    double hi = lo;
    for (const auto& s : chart.series)
        for (double v : s.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi == lo) {
        hi += 0.5;
        lo -= 0.5;
    }
    const std::size_t n = chart.points();
    auto px = [&](std::size_t i) { return left + (n == 1 ? plot_w / 2 : plot_w * static_cast<double>(i) / static_cast<double>(n - 1)); };
    auto py = [&](double v) { return top + plot_h * (1.0 - (v - lo) / (hi - lo)); };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"450\" viewBox=\"0 0 800 450\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"450\" fill=\"white\"/>\n";
    svg += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           detail::esc(chart.title) + "</text>\n";
    svg += "<g stroke=\"#444\" stroke-width=\"1\">\n";
    svg += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top + plot_h) + "\" x2=\"" +
           detail::num(left + plot_w) + "\" y2=\"" + detail::num(top + plot_h) + "\"/>\n";
    svg += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top) + "\" x2=\"" + detail::num(left) +
           "\" y2=\"" + detail::num(top + plot_h) + "\"/>\n";
    svg += "</g>\n";

    svg += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        svg += "<text x=\"" + detail::num(left - 6) + "\" y=\"" + detail::num(py(v) + 4) + "\" text-anchor=\"end\">" +
               csv::format_fixed(v, 4) + "</text>\n";
    }
    const std::size_t tick_step = std::max<std::size_t>(1, (n + 5) / 6);
    for (std::size_t i = 0; i < n; i += tick_step)
        svg += "<text x=\"" + detail::num(px(i)) + "\" y=\"" + detail::num(top + plot_h + 18) +
               "\" text-anchor=\"middle\">" + detail::esc(chart.x_ticks[i]) + "</text>\n";
    svg += "<text x=\"" + detail::num(left + plot_w / 2) + "\" y=\"" + detail::num(height - 12) +
           "\" text-anchor=\"middle\">" + detail::esc(chart.x_label) + "</text>\n";
    svg += "<text x=\"16\" y=\"" + detail::num(top + plot_h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           detail::num(top + plot_h / 2) + ")\">" + detail::esc(chart.y_label) + "</text>\n";
    svg += "</g>\n";

    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        const auto& series = chart.series[s];
        svg += "<polyline fill=\"none\" stroke=\"" + series.color + "\" stroke-width=\"1.5\" data-series=\"" +
               detail::esc(series.name) + "\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            if (i) svg += ' ';
            svg += detail::num(px(i)) + "," + detail::num(py(series.values[i]));
        }
        svg += "\"/>\n";
        const double ly = top + 14 + 16 * static_cast<double>(s);
        svg += "<line x1=\"" + detail::num(left + plot_w - 140) + "\" y1=\"" + detail::num(ly) + "\" x2=\"" +
               detail::num(left + plot_w - 120) + "\" y2=\"" + detail::num(ly) + "\" stroke=\"" + series.color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + detail::num(left + plot_w - 114) + "\" y=\"" + detail::num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::esc(series.name) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

/// Companion CSV of the plotted points: x label column, then one column per series.
inline std::string points_csv(const Chart& chart) {
    check(chart);
    std::ostringstream out;
    std::vector<std::string> head{chart.x_label};
    for (const auto& s : chart.series) head.push_back(s.name);
    csv::write_row(out, head);
    for (std::size_t i = 0; i < chart.points(); ++i) {
        std::vector<std::string> row{chart.x_ticks[i]};
        for (const auto& s : chart.series) row.push_back(csv::format_double(s.values[i]));
        csv::write_row(out, row);
    }
    return out.str();
}

inline Chart loss_chart(std::span<const EpochRecord> history, const std::string& title = "Train loss and test loss") {
    Chart c{title, "epoch", "loss (MAE, scaled)", {}, {{"train_loss", "#1f77b4", {}}, {"val_loss", "#ff7f0e", {}}}};
    for (const auto& h : history) {
        c.x_ticks.push_back(std::to_string(h.epoch));
        c.series[0].values.push_back(h.train_loss);
        c.series[1].values.push_back(h.val_loss);
    }
    return c;
}

inline Chart prediction_chart(std::span<const PredictionPoint> series, const std::string& title = "Actual vs Predicted") {
    Chart c{title, "date", "close price", {}, {{"actual", "#1f77b4", {}}, {"predicted", "#d62728", {}}}};
    for (const auto& p : series) {
        c.x_ticks.push_back(p.date.to_string());
        c.series[0].values.push_back(p.actual);
        c.series[1].values.push_back(p.predicted);
    }
    return c;
}

inline Chart sentiment_rate_chart(const std::map<Date, SentimentScores>& scores,
                                  const std::string& title = "Positive / negative rate") {
    Chart c{title, "date", "probability", {}, {{"positive", "#2ca02c", {}}, {"negative", "#d62728", {}}}};
    for (const auto& [date, s] : scores) {
        c.x_ticks.push_back(date.to_string());
        c.series[0].values.push_back(s.positive);
        c.series[1].values.push_back(s.negative);
    }
    return c;
}

} // namespace tidepool::plot
