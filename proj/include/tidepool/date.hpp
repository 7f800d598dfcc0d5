#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace tidepool {

/// A calendar day, ISO 8601 `YYYY-MM-DD` on the wire.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::year_month_day ymd) : ymd_(ymd) {}
    constexpr Date(int y, unsigned m, unsigned d)
        : ymd_(std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}) {}

    /// Strict parse; nullopt unless `text` is exactly a valid `YYYY-MM-DD`.
    static std::optional<Date> parse(std::string_view text) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
        auto digits = [&](std::size_t from, std::size_t n, int& out) {
            out = 0;
            for (std::size_t i = from; i < from + n; ++i) {
                if (text[i] < '0' || text[i] > '9') return false;
                out = out * 10 + (text[i] - '0');
            }
            return true;
        };
        int y = 0, m = 0, d = 0;
        if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) return std::nullopt;
        Date date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
        if (!date.ymd_.ok()) return std::nullopt;
        return date;
    }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd_.year()),
                      static_cast<unsigned>(ymd_.month()), static_cast<unsigned>(ymd_.day()));
        return buf;
    }

    constexpr std::chrono::year_month_day ymd() const { return ymd_; }

    /// Days since 1970-01-01.
    constexpr long serial() const { return std::chrono::sys_days{ymd_}.time_since_epoch().count(); }

    constexpr Date plus_days(int n) const { return Date{std::chrono::year_month_day{std::chrono::sys_days{ymd_} + std::chrono::days{n}}}; }

    friend constexpr bool operator==(const Date&, const Date&) = default;
    friend constexpr auto operator<=>(const Date& a, const Date& b) { return a.ymd_ <=> b.ymd_; }

private:
    std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::month{1}, std::chrono::day{1}};
};

} // namespace tidepool
