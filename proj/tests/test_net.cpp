#include "tsc/net.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "tsc/rng.hpp"

using namespace tsc;

namespace {

std::vector<double> random_vector(int n, Rng& rng) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = rng.uniform_symmetric(2.0);
    return v;
}

// Central finite differences on every parameter; the independent oracle for
// the analytic gradients.
void check_gradients(const std::vector<int>& dims, std::uint64_t seed) {
    Rng rng(seed);
    Mlp net(dims, rng);
    std::vector<double> input = random_vector(dims.front(), rng);
    int action = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(dims.back())));
    double target = rng.uniform_symmetric(3.0);

    auto [loss, grads] = loss_and_gradients(net, input, action, target);
    (void)loss;

    const double h = 1e-5;
    auto loss_at = [&](Mlp& n) {
        auto out = n.forward(input);
        double diff = target - out[static_cast<std::size_t>(action)];
        return diff * diff;
    };

    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        auto check_param = [&](std::vector<double>& params, const std::vector<double>& g,
                               const char* kind) {
            for (std::size_t i = 0; i < params.size(); ++i) {
                double orig = params[i];
                params[i] = orig + h;
                double lp = loss_at(net);
                params[i] = orig - h;
                double lm = loss_at(net);
                params[i] = orig;
                double fd = (lp - lm) / (2 * h);
                double analytic = g[i];
                double denom = std::max(std::abs(fd), std::abs(analytic));
                if (denom < 1e-3) {
                    ASSERT_NEAR(analytic, fd, 1e-6)
                        << kind << " layer " << l << " param " << i;
                } else {
                    ASSERT_LT(std::abs(analytic - fd) / denom, 1e-4)
                        << kind << " layer " << l << " param " << i;
                }
            }
        };
        check_param(net.layers()[l].weights, grads.layers[l].weights, "weight");
        check_param(net.layers()[l].biases, grads.layers[l].biases, "bias");
    }
}

}  // namespace

TEST(InitMlp, ShapesAndDeterminism) {
    Rng rng(5);
    Mlp net({3, 2}, rng);
    ASSERT_EQ(net.layers().size(), 1u);
    EXPECT_EQ(net.layers()[0].weights.size(), 6u);
    EXPECT_EQ(net.layers()[0].biases.size(), 2u);
    for (double b : net.layers()[0].biases) EXPECT_EQ(b, 0.0);

    Rng r1(9), r2(9), r3(10);
    Mlp a({4, 8, 2}, r1), b({4, 8, 2}, r2), c({4, 8, 2}, r3);
    EXPECT_EQ(a.layers()[0].weights, b.layers()[0].weights);
    EXPECT_EQ(a.layers()[1].weights, b.layers()[1].weights);
    EXPECT_NE(a.layers()[0].weights, c.layers()[0].weights);
}

TEST(InitMlp, RejectsBadDims) {
    Rng rng(1);
    EXPECT_THROW(Mlp({3}, rng), std::invalid_argument);
    EXPECT_THROW(Mlp({3, 0, 2}, rng), std::invalid_argument);
    EXPECT_THROW(Mlp({}, rng), std::invalid_argument);
}

TEST(Forward, ZeroNetOutputsZero) {
    Rng rng(2);
    Mlp net({3, 4, 2}, rng);
    for (auto& l : net.layers()) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.biases.begin(), l.biases.end(), 0.0);
    }
    auto out = net.forward({1.0, -2.0, 3.0});
    for (double v : out) EXPECT_EQ(v, 0.0);
}

TEST(Forward, IdentityLayerPassesThrough) {
    Rng rng(2);
    Mlp net({2, 2}, rng);
    net.layers()[0].weights = {1.0, 0.0, 0.0, 1.0};
    net.layers()[0].biases = {0.0, 0.0};
    auto out = net.forward({-1.5, 2.5});
    EXPECT_EQ(out[0], -1.5);
    EXPECT_EQ(out[1], 2.5);
}

TEST(Forward, ReluClampsNegative) {
    Rng rng(2);
    Mlp net({2, 2, 2}, rng);  // first layer is ReLU
    net.layers()[0].weights = {1.0, 0.0, 0.0, 1.0};
    net.layers()[0].biases = {0.0, 0.0};
    net.layers()[1].weights = {1.0, 0.0, 0.0, 1.0};
    net.layers()[1].biases = {0.0, 0.0};
    auto out = net.forward({-1.0, 2.0});
    EXPECT_EQ(out[0], 0.0);
    EXPECT_EQ(out[1], 2.0);
}

TEST(Forward, RejectsDimensionMismatch) {
    Rng rng(2);
    Mlp net({3, 2}, rng);
    EXPECT_THROW(net.forward({1.0, 2.0}), std::invalid_argument);
}

TEST(LossAndGradients, ZeroLossAtTarget) {
    Rng rng(3);
    Mlp net({3, 4, 2}, rng);
    std::vector<double> input{0.5, -0.5, 1.0};
    double current = net.forward(input)[1];
    auto [loss, grads] = loss_and_gradients(net, input, 1, current);
    EXPECT_EQ(loss, 0.0);
    for (const auto& l : grads.layers) {
        for (double g : l.weights) EXPECT_EQ(g, 0.0);
        for (double g : l.biases) EXPECT_EQ(g, 0.0);
    }
}

TEST(LossAndGradients, ScalarLinearCaseMatchesCalculus) {
    Rng rng(3);
    Mlp net({1, 1}, rng);
    double w = 0.7, x = 1.3, t = 2.0;
    net.layers()[0].weights = {w};
    net.layers()[0].biases = {0.0};
    auto [loss, grads] = loss_and_gradients(net, {x}, 0, t);
    EXPECT_NEAR(loss, (t - w * x) * (t - w * x), 1e-15);
    EXPECT_NEAR(grads.layers[0].weights[0], -2 * x * (t - w * x), 1e-12);
}

TEST(LossAndGradients, RejectsBadIndex) {
    Rng rng(3);
    Mlp net({2, 2}, rng);
    EXPECT_THROW(loss_and_gradients(net, {1.0, 2.0}, 2, 0.0), std::out_of_range);
}

TEST(LossAndGradients, FiniteDifferenceSmall) { check_gradients({3, 2}, 101); }
TEST(LossAndGradients, FiniteDifferenceMedium) { check_gradients({5, 4, 2}, 102); }
TEST(LossAndGradients, FiniteDifferenceRandom532) { check_gradients({5, 3, 2}, 103); }

TEST(AdamStep, ZeroGradientOnlyAdvancesClock) {
    Rng rng(4);
    Mlp net({2, 2}, rng);
    auto before = net.layers()[0].weights;
    AdamState opt = AdamState::for_net(net);
    adam_step(net, opt, GradientBundle::zeros_like(net));
    EXPECT_EQ(opt.t, 1);
    EXPECT_EQ(net.layers()[0].weights, before);
}

TEST(AdamStep, HandComputedFirstStep) {
    Rng rng(4);
    Mlp net({1, 1}, rng);
    net.layers()[0].weights = {1.0};
    net.layers()[0].biases = {0.0};
    AdamState opt = AdamState::for_net(net);
    GradientBundle g = GradientBundle::zeros_like(net);
    g.layers[0].weights[0] = 1.0;
    adam_step(net, opt, g);
    EXPECT_NEAR(opt.m.layers[0].weights[0], 0.1, 1e-12);
    EXPECT_NEAR(opt.v.layers[0].weights[0], 0.001, 1e-12);
    // Bias-corrected mhat = vhat = 1; update = -lr * 1 / (1 + eps).
    EXPECT_NEAR(net.layers()[0].weights[0], 1.0 - 0.001 * (1.0 / (1.0 + 1e-8)), 1e-12);
}

TEST(AdamStep, ConstantGradientMovesMonotonically) {
    Rng rng(4);
    Mlp net({1, 1}, rng);
    net.layers()[0].weights = {0.0};
    AdamState opt = AdamState::for_net(net);
    GradientBundle g = GradientBundle::zeros_like(net);
    g.layers[0].weights[0] = 2.5;
    double prev = 0.0;
    for (int i = 0; i < 100; ++i) {
        adam_step(net, opt, g);
        ASSERT_LT(net.layers()[0].weights[0], prev);
        prev = net.layers()[0].weights[0];
    }
}

TEST(AdamStep, DrivesLossDown) {
    Rng rng(6);
    Mlp net({3, 8, 1}, rng);
    std::vector<double> input{1.0, -1.0, 0.5};
    double target = 2.0;
    AdamState opt = AdamState::for_net(net, 0.01);
    double initial = loss_and_gradients(net, input, 0, target).first;
    for (int i = 0; i < 200; ++i) {
        auto [loss, grads] = loss_and_gradients(net, input, 0, target);
        (void)loss;
        adam_step(net, opt, grads);
    }
    double final_loss = loss_and_gradients(net, input, 0, target).first;
    EXPECT_LT(final_loss, 1e-6 * std::max(initial, 1.0));
}

TEST(CopyParameters, MakesIndependentCopy) {
    Rng rng(7);
    Mlp src({3, 4, 2}, rng);
    Mlp dst({3, 4, 2}, rng);
    copy_parameters(src, dst);
    std::vector<double> x{0.3, -0.2, 0.9};
    EXPECT_EQ(src.forward(x), dst.forward(x));

    // Mutating src must not affect dst (output bias always reaches the output).
    src.layers().back().biases[0] += 1.0;
    EXPECT_NE(src.forward(x), dst.forward(x));
}

TEST(CopyParameters, RejectsArchitectureMismatch) {
    Rng rng(7);
    Mlp a({3, 4, 2}, rng);
    Mlp b({3, 5, 2}, rng);
    EXPECT_THROW(copy_parameters(a, b), std::invalid_argument);
}

TEST(Checkpoint, BitExactRoundTrip) {
    Rng rng(8);
    Mlp net({4, 16, 8, 2}, rng);
    AdamState opt = AdamState::for_net(net);
    // Take a few noisy steps so moments are nontrivial.
    for (int i = 0; i < 5; ++i) {
        auto [loss, grads] = loss_and_gradients(net, {0.1, 0.2, 0.3, 0.4}, 1, -3.7);
        (void)loss;
        adam_step(net, opt, grads);
    }
    auto jn = mlp_to_json(net);
    auto jo = adam_to_json(opt);
    std::string serialized_net = jn.dump();
    std::string serialized_opt = jo.dump();
    Mlp net2 = mlp_from_json(nlohmann::json::parse(serialized_net));
    AdamState opt2 = adam_from_json(nlohmann::json::parse(serialized_opt), net2);

    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        ASSERT_EQ(net.layers()[l].weights, net2.layers()[l].weights);
        ASSERT_EQ(net.layers()[l].biases, net2.layers()[l].biases);
        ASSERT_EQ(opt.m.layers[l].weights, opt2.m.layers[l].weights);
        ASSERT_EQ(opt.v.layers[l].weights, opt2.v.layers[l].weights);
    }
    EXPECT_EQ(opt.t, opt2.t);
}

TEST(Determinism, SameSeedSameDataSameParameters) {
    auto run = [] {
        Rng rng(12);
        Mlp net({3, 8, 2}, rng);
        AdamState opt = AdamState::for_net(net);
        for (int i = 0; i < 50; ++i) {
            auto [loss, grads] =
                loss_and_gradients(net, {1.0 * i, 0.5, -0.5}, i % 2, -1.0 * (i % 7));
            (void)loss;
            adam_step(net, opt, grads);
        }
        return net;
    };
    Mlp a = run(), b = run();
    for (std::size_t l = 0; l < a.layers().size(); ++l) {
        ASSERT_EQ(a.layers()[l].weights, b.layers()[l].weights);
        ASSERT_EQ(a.layers()[l].biases, b.layers()[l].biases);
    }
}
