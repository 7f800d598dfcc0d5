#pragma once

// Versioned JSON model weights. Matrices are row-major arrays of
// 17-significant-digit numbers, so a save/load round trip is bit-exact.

#include <cstdint>
#include <string>

#include "tidepool/json_io.hpp"
#include "tidepool/net/model.hpp"

namespace tidepool::net {

inline constexpr int kModelFormatVersion = 1;

struct SavedModel {
    ModelParams params;
    std::uint64_t seed = 0;
};

/// `train_config`, when given, is stored verbatim under "train_config".
inline std::string model_to_json(const ModelParams& p, std::uint64_t seed,
                                 const nlohmann::ordered_json* train_config = nullptr) {
    const auto dims = p.dims();
    std::string out = "{\n";
    out += "  \"format\": \"tidepool.model\",\n";
    out += "  \"format_version\": " + std::to_string(kModelFormatVersion) + ",\n";
    out += "  \"dims\": {\"input_dim\": " + std::to_string(dims.input_dim) + ", \"units\": " +
           std::to_string(dims.units) + ", \"layers\": " + std::to_string(dims.layers) + "},\n";
    out += "  \"dropout_rate\": " + csv::format_double(p.dropout_rate) + ",\n";
    out += "  \"seed\": " + std::to_string(seed) + ",\n";
    if (train_config) out += "  \"train_config\": " + train_config->dump() + ",\n";
    out += "  \"layers\": [\n";
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& layer = p.layers[l];
        out += "    {\"in_dim\": " + std::to_string(layer.in_dim) + ", \"units\": " + std::to_string(layer.units) +
               ", \"gates\": {\n";
        for (std::size_t gi = 0; gi < kGateCount; ++gi) {
            const auto& g = layer.gates[gi];
            out += std::string("      \"") + kGateNames[gi] + "\": {\"W\": " + json_io::number_array(g.W.data) +
                   ", \"U\": " + json_io::number_array(g.U.data) + ", \"b\": " + json_io::number_array(g.b) + "}";
            out += gi + 1 < kGateCount ? ",\n" : "\n";
        }
        out += "    }}";
        out += l + 1 < p.layers.size() ? ",\n" : "\n";
    }
    out += "  ],\n";
    out += "  \"dense_w\": " + json_io::number_array(p.dense_w) + ",\n";
    out += "  \"dense_b\": " + csv::format_double(p.dense_b) + "\n";
    out += "}\n";
    return out;
}

inline SavedModel model_from_json(const json_io::json& doc, const std::string& source = "<memory>") {
    json_io::require_format(doc, "tidepool.model", kModelFormatVersion, source);
    auto bad = [&](const std::string& what) { return Error(Errc::malformed_row, source + ": " + what); };
    const auto& jd = doc.at("dims");
    ModelDims dims{json_io::get<std::size_t>(jd, "input_dim", source), json_io::get<std::size_t>(jd, "units", source),
                   json_io::get<std::size_t>(jd, "layers", source)};
    SavedModel saved;
    saved.params = ModelParams(dims, json_io::get<double>(doc, "dropout_rate", source));
    saved.seed = json_io::get<std::uint64_t>(doc, "seed", source);

    const auto& jl = doc.at("layers");
    if (!jl.is_array() || jl.size() != dims.layers) throw bad("layer count does not match dims");
    for (std::size_t l = 0; l < dims.layers; ++l) {
        auto& layer = saved.params.layers[l];
        const auto& gates = jl[l].at("gates");
        for (std::size_t gi = 0; gi < kGateCount; ++gi) {
            const auto& jg = gates.at(kGateNames[gi]);
            auto W = json_io::get<std::vector<double>>(jg, "W", source);
            auto U = json_io::get<std::vector<double>>(jg, "U", source);
            auto b = json_io::get<std::vector<double>>(jg, "b", source);
            auto& g = layer.gates[gi];
            if (W.size() != g.W.data.size() || U.size() != g.U.data.size() || b.size() != g.b.size())
                throw bad(std::string("gate '") + kGateNames[gi] + "' of layer " + std::to_string(l) +
                          " has the wrong size");
            g.W.data = std::move(W);
            g.U.data = std::move(U);
            g.b = std::move(b);
        }
    }
    auto dense_w = json_io::get<std::vector<double>>(doc, "dense_w", source);
    if (dense_w.size() != dims.units) throw bad("dense_w has the wrong size");
    saved.params.dense_w = std::move(dense_w);
    saved.params.dense_b = json_io::get<double>(doc, "dense_b", source);
    return saved;
}

inline SavedModel load_model(const std::string& path) { return model_from_json(json_io::load(path), path); }

} // namespace tidepool::net
