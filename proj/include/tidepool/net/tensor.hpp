#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tidepool/error.hpp"

namespace tidepool::net {

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Read-only (samples, time steps, features) view over contiguous storage.
struct SequenceBatch {
    std::span<const double> data;
    std::size_t samples = 0;
    std::size_t steps = 0;
    std::size_t features = 0;

    SequenceBatch() = default;
    SequenceBatch(std::span<const double> d, std::size_t n, std::size_t t, std::size_t f)
        : data(d), samples(n), steps(t), features(f) {
        if (d.size() != n * t * f) throw Error(Errc::shape_mismatch, "sequence batch storage does not match its shape");
    }

    std::span<const double> step(std::size_t sample, std::size_t t) const {
        return data.subspan((sample * steps + t) * features, features);
    }

    SequenceBatch slice(std::size_t begin, std::size_t end) const {
        const std::size_t stride = steps * features;
        return {data.subspan(begin * stride, (end - begin) * stride), end - begin, steps, features};
    }
};

/// Owning (samples, time steps, features) tensor.
struct Tensor3 {
    std::size_t samples = 0;
    std::size_t steps = 0;
    std::size_t features = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(std::size_t n, std::size_t t, std::size_t f) : samples(n), steps(t), features(f), data(n * t * f, 0.0) {}

    double& at(std::size_t n, std::size_t t, std::size_t f) { return data[(n * steps + t) * features + f]; }
    double at(std::size_t n, std::size_t t, std::size_t f) const { return data[(n * steps + t) * features + f]; }

    SequenceBatch view() const { return {data, samples, steps, features}; }
};

} // namespace tidepool::net
