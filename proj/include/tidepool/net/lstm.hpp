#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "tidepool/error.hpp"
#include "tidepool/net/tensor.hpp"

namespace tidepool::net {

enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kCellGate = 2, kOutputGate = 3 };
inline constexpr std::size_t kGateCount = 4;
inline constexpr std::array<const char*, kGateCount> kGateNames{"input", "forget", "cell", "output"};

struct GateParams {
    Matrix W;               // units x in_dim
    Matrix U;               // units x units
    std::vector<double> b;  // units

    friend bool operator==(const GateParams&, const GateParams&) = default;
};

struct LstmLayerParams {
    std::size_t in_dim = 0;
    std::size_t units = 0;
    std::array<GateParams, kGateCount> gates;

    LstmLayerParams() = default;
    LstmLayerParams(std::size_t in, std::size_t n) : in_dim(in), units(n) {
        for (auto& g : gates) g = GateParams{Matrix(n, in), Matrix(n, n), std::vector<double>(n, 0.0)};
    }

    bool consistent() const {
        for (const auto& g : gates)
            if (g.W.rows != units || g.W.cols != in_dim || g.U.rows != units || g.U.cols != units || g.b.size() != units)
                return false;
        return true;
    }

    friend bool operator==(const LstmLayerParams&, const LstmLayerParams&) = default;
};

/// Intermediates of one cell step, kept for the backward pass.
struct CellCache {
    std::vector<double> x, h_prev, c_prev;
    std::vector<double> i, f, g, o;  // gate activations
    std::vector<double> c, tanh_c;
};

struct CellOutput {
    std::vector<double> h;
    std::vector<double> c;
    CellCache cache;
};

struct CellInputGrads {
    std::vector<double> dx;
    std::vector<double> dh_prev;
    std::vector<double> dc_prev;
};

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// i = s(W_i x + U_i h + b_i), f = s(.), o = s(.), g = tanh(.),
/// c = f*c_prev + i*g, h = o*tanh(c).
inline CellOutput lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                                    std::span<const double> c_prev, const LstmLayerParams& p) {
    const std::size_t n = p.units;
    if (x.size() != p.in_dim || h_prev.size() != n || c_prev.size() != n || !p.consistent())
        throw Error(Errc::shape_mismatch, "lstm cell input does not match layer dimensions");

    CellOutput out;
    auto& k = out.cache;
    k.x.assign(x.begin(), x.end());
    k.h_prev.assign(h_prev.begin(), h_prev.end());
    k.c_prev.assign(c_prev.begin(), c_prev.end());

    std::array<std::vector<double>*, kGateCount> act{&k.i, &k.f, &k.g, &k.o};
    for (std::size_t gi = 0; gi < kGateCount; ++gi) {
        const auto& gp = p.gates[gi];
        auto& a = *act[gi];
        a.resize(n);
        for (std::size_t r = 0; r < n; ++r) {
            double z = gp.b[r];
            auto wr = gp.W.row(r);
            for (std::size_t j = 0; j < x.size(); ++j) z += wr[j] * x[j];
            auto ur = gp.U.row(r);
            for (std::size_t j = 0; j < n; ++j) z += ur[j] * h_prev[j];
            a[r] = gi == kCellGate ? std::tanh(z) : sigmoid(z);
        }
    }
    k.c.resize(n);
    k.tanh_c.resize(n);
    out.h.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        k.c[r] = k.f[r] * c_prev[r] + k.i[r] * k.g[r];
        k.tanh_c[r] = std::tanh(k.c[r]);
        out.h[r] = k.o[r] * k.tanh_c[r];
    }
    out.c = k.c;
    return out;
}

/// Back-propagates dL/dh and dL/dc of one step. Parameter gradients are
/// accumulated into `grads`; gradients w.r.t. the step inputs are returned.
inline CellInputGrads lstm_cell_backward(const CellCache& k, std::span<const double> dh, std::span<const double> dc,
                                         const LstmLayerParams& p, LstmLayerParams& grads) {
    const std::size_t n = p.units;
    if (dh.size() != n || dc.size() != n || k.c.size() != n || !grads.consistent() || grads.units != n ||
        grads.in_dim != p.in_dim)
        throw Error(Errc::shape_mismatch, "lstm cell gradient does not match layer dimensions");

    std::array<std::vector<double>, kGateCount> dpre;
    for (auto& v : dpre) v.resize(n);
    CellInputGrads out;
    out.dc_prev.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double dc_total = dc[r] + dh[r] * k.o[r] * (1.0 - k.tanh_c[r] * k.tanh_c[r]);
        dpre[kOutputGate][r] = dh[r] * k.tanh_c[r] * k.o[r] * (1.0 - k.o[r]);
        dpre[kInputGate][r] = dc_total * k.g[r] * k.i[r] * (1.0 - k.i[r]);
        dpre[kCellGate][r] = dc_total * k.i[r] * (1.0 - k.g[r] * k.g[r]);
        dpre[kForgetGate][r] = dc_total * k.c_prev[r] * k.f[r] * (1.0 - k.f[r]);
        out.dc_prev[r] = dc_total * k.f[r];
    }

    out.dx.assign(p.in_dim, 0.0);
    out.dh_prev.assign(n, 0.0);
    for (std::size_t gi = 0; gi < kGateCount; ++gi) {
        const auto& gp = p.gates[gi];
        auto& gg = grads.gates[gi];
        const auto& d = dpre[gi];
        for (std::size_t r = 0; r < n; ++r) {
            const double dr = d[r];
            if (dr == 0.0) continue;
            gg.b[r] += dr;
            auto gw = gg.W.row(r);
            auto w = gp.W.row(r);
            for (std::size_t j = 0; j < p.in_dim; ++j) {
                gw[j] += dr * k.x[j];
                out.dx[j] += dr * w[j];
            }
            auto gu = gg.U.row(r);
            auto u = gp.U.row(r);
            for (std::size_t j = 0; j < n; ++j) {
                gu[j] += dr * k.h_prev[j];
                out.dh_prev[j] += dr * u[j];
            }
        }
    }
    return out;
}

} // namespace tidepool::net
