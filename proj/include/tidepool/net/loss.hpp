#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tidepool/error.hpp"

namespace tidepool::net {

struct LossAndGrad {
    double loss = 0.0;
    std::vector<double> grad;  // dL/dy_hat
};

/// Mean absolute error; the subgradient at a tie is 0.
inline LossAndGrad mae_loss(std::span<const double> y_hat, std::span<const double> y) {
    if (y_hat.size() != y.size()) throw Error(Errc::shape_mismatch, "prediction and target lengths differ");
    if (y.empty()) throw Error(Errc::empty_batch, "MAE of an empty batch");
    const double n = static_cast<double>(y.size());
    LossAndGrad out;
    out.grad.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y_hat[i] - y[i];
        out.loss += std::abs(d);
        out.grad[i] = (d > 0.0 ? 1.0 : d < 0.0 ? -1.0 : 0.0) / n;
    }
    out.loss /= n;
    return out;
}

} // namespace tidepool::net
