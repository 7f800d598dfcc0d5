#pragma once

// Helpers shared by the versioned JSON artifacts (scaler, model, report).

#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "tidepool/csv.hpp"
#include "tidepool/error.hpp"

namespace tidepool::json_io {

using nlohmann::json;

inline json load(const std::string& path) {
    const std::string text = csv::read_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::malformed_row, path + ": invalid JSON: " + e.what());
    }
}

inline void require_format(const json& doc, const std::string& kind, int version, const std::string& source) {
    if (!doc.is_object() || !doc.contains("format") || !doc.contains("format_version"))
        throw Error(Errc::format_version, source + ": not a " + kind + " document");
    if (doc.at("format") != kind)
        throw Error(Errc::format_version, source + ": expected format '" + kind + "'");
    if (doc.at("format_version") != version)
        throw Error(Errc::format_version,
                    source + ": unsupported " + kind + " format_version " + doc.at("format_version").dump());
}

/// JSON array of doubles in 17-significant-digit form.
inline std::string number_array(std::span<const double> values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += csv::format_double(values[i]);
    }
    out += ']';
    return out;
}

inline std::string quoted(const std::string& s) { return json(s).dump(); }

template <class T>
T get(const json& doc, const char* key, const std::string& source) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(Errc::malformed_row, source + ": field '" + key + "': " + e.what());
    }
}

} // namespace tidepool::json_io
