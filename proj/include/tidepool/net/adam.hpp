#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "tidepool/error.hpp"
#include "tidepool/net/model.hpp"

namespace tidepool::net {

struct AdamHyper {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    friend bool operator==(const AdamHyper&, const AdamHyper&) = default;
};

struct AdamState {
    ParamSet m;
    ParamSet v;
    std::uint64_t t = 0;
    AdamHyper hyper;

    AdamState() = default;
    AdamState(const ParamSet& like, AdamHyper h) : m(zero_gradients(like)), v(zero_gradients(like)), hyper(h) {}
};

/// One bias-corrected Adam update of a flat block at step `t` (already incremented).
inline void adam_update(std::span<double> theta, std::span<const double> g, std::span<double> m, std::span<double> v,
                        std::uint64_t t, const AdamHyper& h) {
    if (g.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size())
        throw Error(Errc::shape_mismatch, "adam block sizes differ");
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
        v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        theta[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
    }
}

inline void adam_step(ModelParams& params, const Gradients& grads, AdamState& state) {
    if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v))
        throw Error(Errc::shape_mismatch, "adam parameter, gradient and moment shapes differ");
    state.t += 1;

    std::vector<std::span<double>> theta, m, v;
    std::vector<std::span<const double>> g;
    for_each_block(static_cast<ParamSet&>(params), [&](std::span<double> b) { theta.push_back(b); });
    for_each_block(static_cast<const ParamSet&>(grads), [&](std::span<const double> b) { g.push_back(b); });
    for_each_block(state.m, [&](std::span<double> b) { m.push_back(b); });
    for_each_block(state.v, [&](std::span<double> b) { v.push_back(b); });
    for (std::size_t k = 0; k < theta.size(); ++k) adam_update(theta[k], g[k], m[k], v[k], state.t, state.hyper);
    params.revision += 1;
}

} // namespace tidepool::net
