#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tidepool/error.hpp"
#include "tidepool/net/lstm.hpp"
#include "tidepool/net/rng.hpp"
#include "tidepool/net/tensor.hpp"

namespace tidepool::net {

struct ModelDims {
    std::size_t input_dim = 8;
    std::size_t units = 100;
    std::size_t layers = 3;

    friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Tensors of the stacked LSTM + dense head. Shared by parameters, gradients
/// and optimizer moments so that all of them have identical shapes.
struct ParamSet {
    std::vector<LstmLayerParams> layers;
    std::vector<double> dense_w;
    double dense_b = 0.0;

    ParamSet() = default;
    explicit ParamSet(const ModelDims& dims) {
        if (dims.layers == 0 || dims.units == 0 || dims.input_dim == 0)
            throw Error(Errc::precondition, "model dimensions must be positive");
        for (std::size_t l = 0; l < dims.layers; ++l)
            layers.emplace_back(l == 0 ? dims.input_dim : dims.units, dims.units);
        dense_w.assign(dims.units, 0.0);
    }

    ModelDims dims() const {
        return {layers.empty() ? 0 : layers.front().in_dim, layers.empty() ? 0 : layers.front().units, layers.size()};
    }

    bool same_shape(const ParamSet& other) const {
        if (layers.size() != other.layers.size() || dense_w.size() != other.dense_w.size()) return false;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& a = layers[l];
            const auto& b = other.layers[l];
            if (a.in_dim != b.in_dim || a.units != b.units || !a.consistent() || !b.consistent()) return false;
        }
        return true;
    }

    friend bool operator==(const ParamSet&, const ParamSet&) = default;
};

/// Calls `fn(span)` on every parameter block in a fixed order: per layer, per
/// gate W, U, b; then dense weights and dense bias.
template <class P, class Fn>
    requires std::is_same_v<std::remove_const_t<P>, ParamSet>
void for_each_block(P& ps, Fn&& fn) {
    for (auto& layer : ps.layers)
        for (auto& gate : layer.gates) {
            fn(std::span(gate.W.data));
            fn(std::span(gate.U.data));
            fn(std::span(gate.b));
        }
    fn(std::span(ps.dense_w));
    fn(std::span(&ps.dense_b, 1));
}

inline std::size_t parameter_count(const ParamSet& ps) {
    std::size_t n = 0;
    for_each_block(ps, [&](auto block) { n += block.size(); });
    return n;
}

struct ModelParams : ParamSet {
    double dropout_rate = 0.2;
    std::uint64_t revision = 0;  // bumped on every optimizer update

    ModelParams() = default;
    ModelParams(const ModelDims& dims, double rate) : ParamSet(dims), dropout_rate(rate) {
        if (!(rate >= 0.0 && rate < 1.0)) throw Error(Errc::precondition, "dropout rate must lie in [0, 1)");
    }
};

struct Gradients : ParamSet {
    using ParamSet::ParamSet;
};

inline Gradients zero_gradients(const ParamSet& like) {
    Gradients g;
    static_cast<ParamSet&>(g) = like;
    for_each_block(static_cast<ParamSet&>(g), [](std::span<double> b) { std::fill(b.begin(), b.end(), 0.0); });
    return g;
}

inline void glorot_fill(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& w : m.data) w = rng.uniform(-a, a);
}

/// Glorot-uniform W and U (per gate matrix), zero biases except the forget
/// gate (1.0), Glorot-uniform dense weights and zero dense bias.
inline ModelParams init_params(Rng& rng, const ModelDims& dims, double dropout_rate = 0.2) {
    ModelParams p(dims, dropout_rate);
    for (auto& layer : p.layers)
        for (std::size_t gi = 0; gi < kGateCount; ++gi) {
            auto& g = layer.gates[gi];
            glorot_fill(g.W, layer.in_dim, layer.units, rng);
            glorot_fill(g.U, layer.units, layer.units, rng);
            std::fill(g.b.begin(), g.b.end(), gi == kForgetGate ? 1.0 : 0.0);
        }
    const double a = std::sqrt(6.0 / static_cast<double>(dims.units + 1));
    for (double& w : p.dense_w) w = rng.uniform(-a, a);
    p.dense_b = 0.0;
    return p;
}

enum class Mode { train, eval };

struct LayerTrace {
    std::vector<CellCache> steps;
    // Inverted-dropout multipliers (0 or 1/(1-rate)) per emitted output; empty
    // when dropout is inactive. Lower layers emit every step, the top layer
    // only its final hidden state.
    std::vector<std::vector<double>> masks;
};

struct SampleTrace {
    std::vector<LayerTrace> layers;
    std::vector<double> head_input;  // top hidden state after dropout
};

struct ForwardCache {
    const ParamSet* params = nullptr;
    std::uint64_t revision = 0;
    std::size_t steps = 0;
    std::vector<SampleTrace> samples;
};

struct ForwardResult {
    std::vector<double> y_hat;
    ForwardCache cache;
};

namespace detail {

inline std::vector<double> draw_mask(std::size_t n, double rate, Rng& rng) {
    std::vector<double> mask(n);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& m : mask) m = rng.uniform() >= rate ? keep_scale : 0.0;
    return mask;
}

inline void apply_mask(std::vector<double>& v, const std::vector<double>& mask) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= mask[i];
}

} // namespace detail

/// Runs the stack over every sample from zero initial states. In train mode
/// each layer output is passed through inverted dropout drawn from `rng`.
inline ForwardResult model_forward(const SequenceBatch& X, const ModelParams& params, Mode mode, Rng* rng) {
    if (params.layers.empty() || X.features != params.layers.front().in_dim || X.steps == 0)
        throw Error(Errc::shape_mismatch, "input features do not match the model's input dimension");
    const bool dropout = mode == Mode::train && params.dropout_rate > 0.0;
    if (mode == Mode::train && rng == nullptr) throw Error(Errc::precondition, "train mode requires an rng");

    ForwardResult res;
    res.y_hat.resize(X.samples);
    res.cache.params = &params;
    res.cache.revision = params.revision;
    res.cache.steps = X.steps;
    res.cache.samples.resize(X.samples);

    const std::size_t L = params.layers.size();
    for (std::size_t s = 0; s < X.samples; ++s) {
        auto& trace = res.cache.samples[s];
        trace.layers.resize(L);
        std::vector<std::vector<double>> inputs(X.steps);
        for (std::size_t t = 0; t < X.steps; ++t) inputs[t].assign(X.step(s, t).begin(), X.step(s, t).end());

        for (std::size_t l = 0; l < L; ++l) {
            const auto& layer = params.layers[l];
            auto& lt = trace.layers[l];
            const bool top = l + 1 == L;
            std::vector<double> h(layer.units, 0.0), c(layer.units, 0.0);
            std::vector<std::vector<double>> outputs;
            for (std::size_t t = 0; t < X.steps; ++t) {
                auto step = lstm_cell_forward(inputs[t], h, c, layer);
                h = std::move(step.h);
                c = std::move(step.c);
                lt.steps.push_back(std::move(step.cache));
                if (!top) {
                    auto out = h;
                    if (dropout) {
                        lt.masks.push_back(detail::draw_mask(out.size(), params.dropout_rate, *rng));
                        detail::apply_mask(out, lt.masks.back());
                    }
                    outputs.push_back(std::move(out));
                }
            }
            if (top) {
                trace.head_input = h;
                if (dropout) {
                    lt.masks.push_back(detail::draw_mask(h.size(), params.dropout_rate, *rng));
                    detail::apply_mask(trace.head_input, lt.masks.back());
                }
            } else {
                inputs = std::move(outputs);
            }
        }
        double y = params.dense_b;
        for (std::size_t j = 0; j < params.dense_w.size(); ++j) y += params.dense_w[j] * trace.head_input[j];
        res.y_hat[s] = y;
    }
    return res;
}

/// Eval-mode outputs only.
inline std::vector<double> predict(const SequenceBatch& X, const ModelParams& params) {
    return model_forward(X, params, Mode::eval, nullptr).y_hat;
}

/// Exact gradients of L w.r.t. every parameter, given dL/dy_hat, by
/// reverse-mode through the dense head, the dropout masks and each layer
/// unrolled over time.
inline Gradients model_backward(const ForwardCache& cache, std::span<const double> dy, const ModelParams& params) {
    if (cache.params != &params || cache.revision != params.revision)
        throw Error(Errc::stale_cache, "forward cache was produced for different or since-updated parameters");
    if (dy.size() != cache.samples.size())
        throw Error(Errc::shape_mismatch, "upstream gradient length does not match the batch size");

    Gradients grads = zero_gradients(params);
    const std::size_t L = params.layers.size();
    const std::size_t T = cache.steps;

    for (std::size_t s = 0; s < cache.samples.size(); ++s) {
        const auto& trace = cache.samples[s];
        const double g = dy[s];
        if (g == 0.0) continue;
        for (std::size_t j = 0; j < params.dense_w.size(); ++j) grads.dense_w[j] += g * trace.head_input[j];
        grads.dense_b += g;

        // d_out[t]: gradient w.r.t. the current layer's (pre-dropout) output at step t.
        const std::size_t top_units = params.layers.back().units;
        std::vector<std::vector<double>> d_out(T, std::vector<double>(top_units, 0.0));
        for (std::size_t j = 0; j < top_units; ++j) d_out[T - 1][j] = g * params.dense_w[j];
        if (!trace.layers.back().masks.empty()) detail::apply_mask(d_out[T - 1], trace.layers.back().masks.front());

        for (std::size_t l = L; l-- > 0;) {
            const auto& layer = params.layers[l];
            const auto& lt = trace.layers[l];
            std::vector<double> dh_next(layer.units, 0.0), dc_next(layer.units, 0.0);
            std::vector<std::vector<double>> d_in(T);
            for (std::size_t t = T; t-- > 0;) {
                std::vector<double> dh = d_out[t];
                for (std::size_t j = 0; j < dh.size(); ++j) dh[j] += dh_next[j];
                auto back = lstm_cell_backward(lt.steps[t], dh, dc_next, layer, grads.layers[l]);
                dh_next = std::move(back.dh_prev);
                dc_next = std::move(back.dc_prev);
                d_in[t] = std::move(back.dx);
            }
            if (l > 0) {
                const auto& below = trace.layers[l - 1];
                if (!below.masks.empty())
                    for (std::size_t t = 0; t < T; ++t) detail::apply_mask(d_in[t], below.masks[t]);
                d_out = std::move(d_in);
            }
        }
    }
    return grads;
}

} // namespace tidepool::net
