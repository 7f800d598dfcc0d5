#pragma once

// RFC 4180 reading and writing plus locale-independent number text.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "tidepool/error.hpp"

namespace tidepool::csv {

struct Record {
    std::size_t line = 0;  // physical line on which the record starts (1-based)
    std::vector<std::string> fields;
};

/// Splits a whole document into records. Quoted fields may contain commas,
/// doubled quotes and line breaks. CRLF and LF terminators are both accepted;
/// a leading UTF-8 byte-order mark is dropped. Blank lines are skipped.
inline std::vector<Record> parse(std::string_view text, const std::string& source = "<memory>") {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::vector<Record> records;
    Record current;
    std::string field;
    std::size_t line = 1;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool record_has_content = false;
    current.line = 1;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        bool blank = current.fields.size() == 1 && current.fields[0].empty() && !record_has_content;
        if (!blank) records.push_back(std::move(current));
        current = Record{};
        record_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            if (!field.empty() || field_was_quoted)
                throw Error(Errc::malformed_row, at_line(source, line) + ": stray quote inside unquoted field", line);
            in_quotes = true;
            field_was_quoted = true;
            record_has_content = true;
            break;
        case ',':
            record_has_content = true;
            end_field();
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            [[fallthrough]];
        case '\n':
            end_record();
            ++line;
            current.line = line;
            break;
        default:
            if (field_was_quoted)
                throw Error(Errc::malformed_row, at_line(source, line) + ": text after closing quote", line);
            field.push_back(ch);
            record_has_content = true;
        }
    }
    if (in_quotes)
        throw Error(Errc::malformed_row, at_line(source, current.line) + ": unterminated quoted field", current.line);
    if (record_has_content || !field.empty()) end_record();
    return records;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::vector<Record> read(const std::string& path) { return parse(read_file(path), path); }

/// Header lookup: maps required column names to indices.
class Header {
public:
    Header(const Record& header, std::string source) : names_(header.fields), source_(std::move(source)) {}

    std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return i;
        return std::nullopt;
    }

    std::size_t require(std::string_view name) const {
        if (auto idx = find(name)) return *idx;
        throw Error(Errc::missing_column, source_ + ": missing column '" + std::string(name) + "'", 1);
    }

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
    std::string source_;
};

inline std::optional<double> parse_double(std::string_view text) {
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

inline std::optional<std::int64_t> parse_int(std::string_view text) {
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

/// `%.17g`-style text; always parses back to the same double.
inline std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// Fixed-point text with `decimals` digits, independent of the C locale.
inline std::string format_fixed(double value, int decimals) {
    char buf[128];
    auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr);
}

inline std::string quote(std::string_view field) {
    bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << quote(fields[i]);
    }
    out << '\n';
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
    return out;
}

} // namespace tidepool::csv
