#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tidepool/net/adam.hpp"
#include "tidepool/net/loss.hpp"
#include "tidepool/net/model.hpp"
#include "tidepool/net/serialize.hpp"

using namespace tidepool;
using namespace tidepool::net;

namespace {

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Straight-line LSTM step written per scalar, independent of the library layout.
void oracle_step(const LstmLayerParams& p, const std::vector<double>& x, const std::vector<double>& h,
                 const std::vector<double>& c, std::vector<double>& h_out, std::vector<double>& c_out) {
    const std::size_t n = p.units;
    h_out.assign(n, 0);
    c_out.assign(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        double z[4];
        for (int g = 0; g < 4; ++g) {
            z[g] = p.gates[g].b[r];
            for (std::size_t j = 0; j < x.size(); ++j) z[g] += p.gates[g].W(r, j) * x[j];
            for (std::size_t j = 0; j < n; ++j) z[g] += p.gates[g].U(r, j) * h[j];
        }
        const double i = sig(z[0]), f = sig(z[1]), g = std::tanh(z[2]), o = sig(z[3]);
        c_out[r] = f * c[r] + i * g;
        h_out[r] = o * std::tanh(c_out[r]);
    }
}

LstmLayerParams random_layer(std::size_t in, std::size_t n, Rng& rng) {
    LstmLayerParams p(in, n);
    for (auto& g : p.gates) {
        for (double& w : g.W.data) w = rng.uniform(-1, 1);
        for (double& w : g.U.data) w = rng.uniform(-1, 1);
        for (double& b : g.b) b = rng.uniform(-1, 1);
    }
    return p;
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1, 1);
    return v;
}

} // namespace

TEST(Rng, DeterministicAndInRange) {
    Rng a(42), b(42), c(43);
    for (int k = 0; k < 100; ++k) {
        const double x = a.uniform();
        EXPECT_EQ(x, b.uniform());
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
    }
    EXPECT_NE(Rng(42).next_u64(), c.next_u64());
    EXPECT_NE(Rng(0).next_u64(), 0u);
}

TEST(Init, SeededInitIsBitIdentical) {
    Rng a(42), b(42);
    EXPECT_EQ(static_cast<const ParamSet&>(init_params(a, {8, 100, 3})), static_cast<const ParamSet&>(init_params(b, {8, 100, 3})));
}

TEST(Init, GlorotRangeAndForgetBias) {
    Rng rng(42);
    auto p = init_params(rng, {8, 16, 2});
    for (const auto& layer : p.layers) {
        const double aw = std::sqrt(6.0 / static_cast<double>(layer.in_dim + layer.units));
        const double au = std::sqrt(6.0 / static_cast<double>(2 * layer.units));
        for (std::size_t gi = 0; gi < kGateCount; ++gi) {
            for (double w : layer.gates[gi].W.data) EXPECT_LT(std::abs(w), aw);
            for (double w : layer.gates[gi].U.data) EXPECT_LT(std::abs(w), au);
            for (double b : layer.gates[gi].b) EXPECT_EQ(b, gi == kForgetGate ? 1.0 : 0.0);
        }
    }
    EXPECT_EQ(p.dense_b, 0.0);
    EXPECT_EQ(parameter_count(p), 4u * (16 * 8 + 16 * 16 + 16) + 4u * (16 * 16 + 16 * 16 + 16) + 17u);
}

TEST(Cell, AllZeroGivesZeroState) {
    LstmLayerParams p(3, 2);
    auto out = lstm_cell_forward(std::vector<double>(3, 0.0), std::vector<double>(2, 0.0), std::vector<double>(2, 0.0), p);
    for (double v : out.h) EXPECT_EQ(v, 0.0);
    for (double v : out.c) EXPECT_EQ(v, 0.0);
}

TEST(Cell, SaturatedInputGatePassesCandidate) {
    LstmLayerParams p(1, 1);
    p.gates[kInputGate].b[0] = 50.0;   // i ~ 1
    p.gates[kForgetGate].b[0] = -50.0; // f ~ 0
    p.gates[kCellGate].W(0, 0) = 0.7;
    auto out = lstm_cell_forward(std::vector<double>{0.5}, std::vector<double>{0.0}, std::vector<double>{0.9}, p);
    EXPECT_NEAR(out.cache.i[0], 1.0, 1e-15);
    EXPECT_NEAR(out.c[0], std::tanh(0.35), 1e-15);
}

TEST(Cell, MatchesStraightLineOracle) {
    Rng rng(9);
    for (int k = 0; k < 20; ++k) {
        auto p = random_layer(4, 3, rng);
        auto x = random_vec(4, rng), h = random_vec(3, rng), c = random_vec(3, rng);
        std::vector<double> h2, c2;
        oracle_step(p, x, h, c, h2, c2);
        auto out = lstm_cell_forward(x, h, c, p);
        for (std::size_t r = 0; r < 3; ++r) {
            EXPECT_NEAR(out.h[r], h2[r], 1e-12);
            EXPECT_NEAR(out.c[r], c2[r], 1e-12);
        }
    }
}

TEST(Cell, ShapeMismatchThrows) {
    LstmLayerParams p(3, 2);
    EXPECT_THROW(lstm_cell_forward(std::vector<double>(2), std::vector<double>(2), std::vector<double>(2), p), Error);
}

TEST(Forward, EvalIsDeterministicAndRateZeroMatchesTrain) {
    Rng rng(1);
    auto p = init_params(rng, {8, 6, 3}, 0.0);
    Tensor3 X(5, 2, 8);
    for (double& x : X.data) x = rng.uniform();
    EXPECT_EQ(predict(X.view(), p), predict(X.view(), p));
    Rng r2(5);
    EXPECT_EQ(model_forward(X.view(), p, Mode::train, &r2).y_hat, predict(X.view(), p));
    EXPECT_EQ(r2, Rng(5));  // no masks drawn
}

TEST(Forward, TrainModeIsReproducibleForAFixedSeed) {
    Rng rng(1);
    auto p = init_params(rng, {8, 6, 2}, 0.3);
    Tensor3 X(4, 1, 8);
    for (double& x : X.data) x = rng.uniform();
    Rng a(77), b(77);
    const auto ya = model_forward(X.view(), p, Mode::train, &a).y_hat;
    EXPECT_EQ(ya, model_forward(X.view(), p, Mode::train, &b).y_hat);
    EXPECT_NE(ya, predict(X.view(), p));
    // Frozen from the first run of this exact configuration.
    EXPECT_NEAR(ya[0], 0.0043319352131107845, 1e-12);
}

TEST(Forward, DropoutKeepsTheExpectedActivation) {
    // With one layer only the final hidden state is masked and the head is
    // linear in the mask, so the mean of many masked passes is the eval output.
    Rng rng(3);
    auto p = init_params(rng, {8, 12, 1}, 0.2);
    Tensor3 X(1, 1, 8);
    for (double& x : X.data) x = rng.uniform();
    const double eval = predict(X.view(), p)[0];
    double sum = 0.0;
    const int n = 200000;
    Rng masks(4);
    for (int k = 0; k < n; ++k) sum += model_forward(X.view(), p, Mode::train, &masks).y_hat[0];
    EXPECT_NEAR(sum / n, eval, 5e-3);
}

TEST(Forward, TrainModeNeedsRng) {
    Rng rng(1);
    auto p = init_params(rng, {8, 4, 1});
    Tensor3 X(1, 1, 8);
    EXPECT_THROW(model_forward(X.view(), p, Mode::train, nullptr), Error);
}

TEST(Loss, MaeValuesAndSubgradient) {
    auto same = mae_loss(std::vector<double>{1, 2}, std::vector<double>{1, 2});
    EXPECT_EQ(same.loss, 0.0);
    EXPECT_EQ(same.grad, (std::vector<double>{0, 0}));
    auto l = mae_loss(std::vector<double>{1, -1}, std::vector<double>{0, 0});
    EXPECT_EQ(l.loss, 1.0);
    EXPECT_EQ(l.grad, (std::vector<double>{0.5, -0.5}));
    EXPECT_THROW(mae_loss(std::vector<double>{}, std::vector<double>{}), Error);
    EXPECT_THROW(mae_loss(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}

TEST(Loss, GradientMatchesFiniteDifferences) {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> a(5), y(5);
        for (auto& v : a) v = u(gen);
        for (auto& v : y) v = u(gen);
        const auto g = mae_loss(a, y).grad;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (std::abs(a[i] - y[i]) < 1e-3) continue;  // away from the kink
            auto up = a, down = a;
            up[i] += 1e-6;
            down[i] -= 1e-6;
            EXPECT_NEAR((mae_loss(up, y).loss - mae_loss(down, y).loss) / 2e-6, g[i], 1e-6);
        }
    }
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
    Rng rng(3);
    auto p = init_params(rng, {8, 4, 2});
    Tensor3 X(3, 2, 8);
    auto fwd = model_forward(X.view(), p, Mode::eval, nullptr);
    auto g = model_backward(fwd.cache, std::vector<double>(3, 0.0), p);
    EXPECT_TRUE(g.same_shape(p));
    std::size_t nonzero = 0;
    for_each_block(static_cast<const ParamSet&>(g), [&](std::span<const double> b) {
        for (double v : b) nonzero += v != 0.0;
    });
    EXPECT_EQ(nonzero, 0u);
}

TEST(Backward, MatchesFiniteDifferencesOnSmallModel) {
    Rng rng(11);
    auto p = init_params(rng, {3, 4, 2}, 0.0);
    Tensor3 X(3, 3, 3);
    for (double& x : X.data) x = rng.uniform(-1, 1);
    const std::vector<double> y{0.3, -0.2, 0.5};
    auto loss_at = [&] { return mae_loss(predict(X.view(), p), y).loss; };
    auto fwd = model_forward(X.view(), p, Mode::eval, nullptr);
    auto g = model_backward(fwd.cache, mae_loss(fwd.y_hat, y).grad, p);

    std::vector<std::span<double>> theta;
    std::vector<std::span<const double>> analytic;
    for_each_block(static_cast<ParamSet&>(p), [&](std::span<double> b) { theta.push_back(b); });
    for_each_block(static_cast<const ParamSet&>(g), [&](std::span<const double> b) { analytic.push_back(b); });
    double worst = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k)
        for (std::size_t i = 0; i < theta[k].size(); ++i) {
            const double s = theta[k][i];
            theta[k][i] = s + 1e-5;
            const double up = loss_at();
            theta[k][i] = s - 1e-5;
            const double down = loss_at();
            theta[k][i] = s;
            const double num = (up - down) / 2e-5;
            worst = std::max(worst, std::abs(num - analytic[k][i]) / std::max({std::abs(num), std::abs(analytic[k][i]), 1e-6}));
        }
    EXPECT_LT(worst, 1e-4);
}

TEST(Backward, StaleCacheIsRejected) {
    Rng rng(3);
    auto p = init_params(rng, {8, 4, 1});
    Tensor3 X(1, 1, 8);
    auto fwd = model_forward(X.view(), p, Mode::eval, nullptr);
    AdamState st(p, {});
    adam_step(p, zero_gradients(p), st);
    EXPECT_THROW(model_backward(fwd.cache, std::vector<double>{1.0}, p), Error);
    auto other = p;
    auto fwd2 = model_forward(X.view(), other, Mode::eval, nullptr);
    EXPECT_THROW(model_backward(fwd2.cache, std::vector<double>{1.0}, p), Error);
}

TEST(Adam, FirstStepWithUnitGradientMovesByLr) {
    std::vector<double> theta{0.5, -2.0}, m(2, 0.0), v(2, 0.0);
    adam_update(theta, std::vector<double>{1.0, 1.0}, m, v, 1, AdamHyper{});
    EXPECT_NEAR(theta[0], 0.5 - 0.001 / (1 + 1e-8), 1e-15);
    EXPECT_NEAR(theta[1], -2.0 - 0.001 / (1 + 1e-8), 1e-15);
}

TEST(Adam, ZeroGradientIsAFixedPoint) {
    Rng rng(3);
    auto p = init_params(rng, {8, 4, 1});
    auto before = static_cast<ParamSet>(p);
    AdamState st(p, {});
    adam_step(p, zero_gradients(p), st);
    EXPECT_EQ(static_cast<ParamSet>(p), before);
    EXPECT_EQ(st.t, 1u);
}

TEST(Adam, QuadraticTrajectoryMatchesStraightLineOracle) {
    double th = 4.0, m = 0.0, v = 0.0;
    std::vector<double> theta{4.0}, mm{0.0}, vv{0.0};
    for (int t = 1; t <= 10; ++t) {
        const double g = 2.0 * (th - 1.0);
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        th -= 0.001 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
        adam_update(theta, std::vector<double>{2.0 * (theta[0] - 1.0)}, mm, vv, t, AdamHyper{});
        EXPECT_NEAR(theta[0], th, 1e-12);
    }
}

TEST(Serialize, JsonRoundTripIsBitExact) {
    Rng rng(42);
    auto p = init_params(rng, {8, 5, 3}, 0.2);
    auto saved = model_from_json(nlohmann::json::parse(model_to_json(p, 42)));
    EXPECT_EQ(static_cast<const ParamSet&>(saved.params), static_cast<const ParamSet&>(p));
    EXPECT_EQ(saved.params.dropout_rate, 0.2);
    EXPECT_EQ(saved.seed, 42u);
}

TEST(Serialize, RejectsOtherVersionsAndWrongShapes) {
    Rng rng(42);
    auto p = init_params(rng, {8, 5, 1}, 0.2);
    auto doc = nlohmann::json::parse(model_to_json(p, 1));
    auto bumped = doc;
    bumped["format_version"] = 2;
    EXPECT_THROW(model_from_json(bumped), Error);
    auto truncated = doc;
    truncated["dense_w"] = std::vector<double>{1.0};
    EXPECT_THROW(model_from_json(truncated), Error);
}
