#include <gtest/gtest.h>

#include <cmath>

#include "dlpde/net.hpp"
#include "dlpde/sampling.hpp"

using namespace dlpde;

namespace {

// Straight-line reimplementation in long double, independent of forward().
long double chain_oracle(const NetworkParams& p, long double x, long double t) {
    std::vector<long double> z{(x - p.x_map.shift) * p.x_map.scale, (t - p.t_map.shift) * p.t_map.scale};
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        std::vector<long double> next;
        for (Eigen::Index r = 0; r < p.weights[l].rows(); ++r) {
            long double acc = p.biases[l](r);
            for (Eigen::Index c = 0; c < p.weights[l].cols(); ++c) acc += p.weights[l](r, c) * z[c];
            if (l + 1 < p.weights.size()) acc = p.activation == Activation::Tanh ? std::tanh(acc) : std::sin(acc);
            next.push_back(acc);
        }
        z = next;
    }
    return p.output.shift + p.output.scale * z[0];
}

SampleSet grid_samples(int nx, int nt, double (*f)(double, double)) {
    SampleSet s;
    for (int j = 0; j < nt; ++j)
        for (int i = 0; i < nx; ++i) {
            const double x = -1.0 + 2.0 * i / (nx - 1), t = 2.0 * j / (nt - 1);
            s.points.push_back({x, t, f(x, t)});
        }
    return s;
}

NetworkParams scaled_random_net(Activation a, std::uint64_t seed) {
    NetworkParams p = init_network({2, 8, 6, 1}, a, seed);
    for (auto& b : p.biases) b.setConstant(0.1);
    p.x_map = {0.3, 1.7, true};
    p.t_map = {-0.2, 0.8, true};
    p.output = {0.5, 2.0, true};
    return p;
}

}  // namespace

TEST(Init, Presets) {
    EXPECT_EQ(preset_layer_sizes("standard"), (std::vector<int>{2, 20, 20, 20, 20, 20, 20, 20, 1}));
    EXPECT_EQ(preset_activation("standard"), Activation::Tanh);
    EXPECT_EQ(preset_layer_sizes("kdv"), (std::vector<int>{2, 50, 50, 50, 1}));
    EXPECT_EQ(preset_activation("kdv"), Activation::Sin);
    EXPECT_THROW(preset_layer_sizes("huge"), ParameterError);
    const NetworkParams p = init_preset("standard", 1);
    EXPECT_EQ(p.layers(), 8u);
    EXPECT_EQ(p.weights[0].rows(), 20);
    EXPECT_EQ(p.weights[0].cols(), 2);
    EXPECT_EQ(p.weights.back().rows(), 1);
}

TEST(Init, SeedDeterminismAndVariance) {
    EXPECT_EQ(init_preset("standard", 7), init_preset("standard", 7));
    EXPECT_NE(init_preset("standard", 7), init_preset("standard", 8));
    const NetworkParams p = init_network({2, 400, 400, 1}, Activation::Tanh, 3);
    EXPECT_NEAR(p.weights[1].squaredNorm() / p.weights[1].size(), 1.0 / 400, 0.05 / 400);
    EXPECT_EQ(p.biases[1].cwiseAbs().maxCoeff(), 0.0);
}

TEST(Init, SinFirstLayerFrequency) {
    const NetworkParams a = init_network({2, 5, 1}, Activation::Sin, 4, 1.0);
    const NetworkParams b = init_network({2, 5, 1}, Activation::Sin, 4, 3.0);
    EXPECT_TRUE(b.weights[0].isApprox(3.0 * a.weights[0]));
    EXPECT_EQ(a.weights[1], b.weights[1]);
}

TEST(Init, RejectsEmptyHiddenLayers) {
    EXPECT_THROW(init_network({2, 1}, Activation::Tanh, 1), ParameterError);
    EXPECT_THROW(init_network({2, 0, 1}, Activation::Tanh, 1), ParameterError);
}

TEST(Forward, ZeroWeightsGiveLastBias) {
    NetworkParams p = init_preset("standard", 2);
    for (auto& w : p.weights) w.setZero();
    p.biases.back()(0) = 0.37;
    EXPECT_DOUBLE_EQ(forward(p, 0.3, -4.0), 0.37);
    EXPECT_DOUBLE_EQ(forward(p, 100.0, 2.0), 0.37);
}

TEST(Forward, OneHiddenLayerAtOrigin) {
    NetworkParams p = init_network({2, 4, 1}, Activation::Tanh, 5);
    p.weights[0].setZero();
    p.biases[0].setZero();
    p.biases[1](0) = -1.5;
    EXPECT_DOUBLE_EQ(forward(p, 0.8, 0.1), -1.5);
}

TEST(Forward, MatchesIndependentChainOracle) {
    for (Activation a : {Activation::Tanh, Activation::Sin}) {
        const NetworkParams p = scaled_random_net(a, 11);
        Rng rng(99);
        Eigen::VectorXd xs(100), ts(100);
        for (int k = 0; k < 100; ++k) {
            xs(k) = 4.0 * rng.symmetric();
            ts(k) = 3.0 * rng.uniform();
        }
        const Eigen::VectorXd batched = predict(p, xs, ts);
        for (int k = 0; k < 100; ++k) {
            const long double ref = chain_oracle(p, xs(k), ts(k));
            EXPECT_NEAR(forward(p, xs(k), ts(k)), static_cast<double>(ref), 1e-12);
            EXPECT_NEAR(batched(k), static_cast<double>(ref), 1e-12);
        }
    }
}

TEST(Loss, ConstantNetFormula) {
    NetworkParams p = init_network({2, 3, 1}, Activation::Tanh, 1);
    for (auto& w : p.weights) w.setZero();
    p.biases.back()(0) = 0.5;
    SampleSet s;
    s.points = {{0, 0, 1.0}, {1, 1, -2.0}};
    EXPECT_DOUBLE_EQ(loss(p, s), 0.25 + 6.25);
}

TEST(Loss, InterpolatingNetIsZero) {
    NetworkParams p = init_network({2, 3, 1}, Activation::Tanh, 1);
    SampleSet s;
    for (double x : {-1.0, 0.0, 2.0}) s.points.push_back({x, 0.5, forward(p, x, 0.5)});
    EXPECT_EQ(loss(p, s), 0.0);
    EXPECT_THROW(loss(p, SampleSet{}), ParameterError);
}

TEST(Gradient, BackpropMatchesCentralDifferences) {
    for (Activation a : {Activation::Tanh, Activation::Sin}) {
        const NetworkParams p = scaled_random_net(a, 21);
        SampleSet s;
        Rng rng(5);
        for (int k = 0; k < 40; ++k) s.points.push_back({2 * rng.symmetric(), rng.uniform(), rng.symmetric()});
        const NetworkGradient g = loss_gradient(p, s);
        EXPECT_NEAR(g.loss, loss(p, s), 1e-12 * g.loss);
        Rng pick(17);
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t l = pick.below(p.layers());
            const bool bias = pick.below(3) == 0;
            const Eigen::Index r = static_cast<Eigen::Index>(pick.below(p.weights[l].rows()));
            const Eigen::Index c = static_cast<Eigen::Index>(pick.below(p.weights[l].cols()));
            double& slot = bias ? const_cast<NetworkParams&>(p).biases[l](r) : const_cast<NetworkParams&>(p).weights[l](r, c);
            NetworkParams plus = p, minus = p;
            const double h = 1e-4;
            (bias ? plus.biases[l](r) : plus.weights[l](r, c)) = slot + h;
            (bias ? minus.biases[l](r) : minus.weights[l](r, c)) = slot - h;
            const double fd = (loss(plus, s) - loss(minus, s)) / (2 * h);
            const double an = bias ? g.biases[l](r) : g.weights[l](r, c);
            EXPECT_NEAR(an, fd, 1e-5 * std::max(1.0, std::abs(fd))) << "layer " << l << (bias ? " bias" : " weight");
        }
    }
}

TEST(Train, ZeroIterationsLeavesParamsUnchanged) {
    const NetworkParams p = init_preset("standard", 3);
    TrainConfig c;
    c.iterations = 0;
    const TrainResult r = train(p, grid_samples(5, 5, [](double x, double t) { return x + t; }), c);
    EXPECT_EQ(r.params, p);
    EXPECT_EQ(r.iterations_run, 0);
}

TEST(Train, FitsALinearFunction) {
    const SampleSet s = grid_samples(11, 11, [](double x, double t) { return 2 * x + 3 * t; });
    TrainConfig c;
    // tanh units approximate a plane only in their linear regime, which Adam
    // approaches slowly; the tiny problem makes a long schedule cheap.
    c.iterations = 200000;
    c.learning_rate = 3e-3;
    c.lr_decay_every = 40000;
    c.lr_decay_factor = 0.4;
    c.history_every = 20000;
    c.seed = 1;
    const TrainResult r = train(init_network({2, 10, 1}, Activation::Tanh, 2), s, c);
    double worst = 0.0;
    for (const auto& pt : s.points) worst = std::max(worst, std::abs(forward(r.params, pt.x, pt.t) - pt.u));
    EXPECT_LT(worst, 1e-3);
}

TEST(Train, DeterministicAndMonotoneOnAverage) {
    const SampleSet s = grid_samples(12, 10, [](double x, double t) { return std::sin(2 * x) * std::exp(-t); });
    TrainConfig c;
    c.iterations = 3000;
    c.seed = 4;
    c.history_every = 50;
    const NetworkParams init = init_preset("standard", 6);
    const TrainResult a = train(init, s, c), b = train(init, s, c);
    EXPECT_EQ(a.params, b.params);
    ASSERT_EQ(a.history.size(), 60u);
    // Means over 1000-step windows; Adam's transient spikes get 10% slack.
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w + 20 <= a.history.size(); w += 20) {
        double m = 0.0;
        for (std::size_t k = w; k < w + 20; ++k) m += a.history[k].loss;
        m /= 20;
        EXPECT_LE(m, 1.1 * previous);
        previous = m;
    }
    EXPECT_LT(a.history.back().loss, 0.1 * a.history.front().loss);
}

TEST(Train, MinibatchIsDeterministicToo) {
    const SampleSet s = grid_samples(20, 20, [](double x, double t) { return x * t; });
    TrainConfig c;
    c.iterations = 200;
    c.batch = 64;
    c.seed = 9;
    const NetworkParams init = init_network({2, 6, 1}, Activation::Tanh, 1);
    EXPECT_EQ(train(init, s, c).params, train(init, s, c).params);
    c.seed = 10;
    EXPECT_NE(train(init, s, c).params, train(init, s, TrainConfig{}).params);
}

TEST(Train, ValidationHoldoutKeepsTheBestWeights) {
    // Noisy targets: the holdout loss stops improving long before the training loss does.
    SampleSet s = grid_samples(8, 8, [](double x, double t) { return x + 0.5 * t; });
    Rng rng(3);
    for (auto& p : s.points) p.u += 0.3 * rng.symmetric();
    TrainConfig c;
    c.iterations = 20000;
    c.learning_rate = 1e-2;
    c.validation_fraction = 0.25;
    c.patience = 1000;
    c.seed = 2;
    const TrainResult r = train(init_network({2, 30, 30, 1}, Activation::Tanh, 1), s, c);
    EXPECT_TRUE(r.early_stopped);
    EXPECT_LT(r.iterations_run, c.iterations);
    EXPECT_LE(r.best_step, r.iterations_run - c.patience + c.history_every);
    EXPECT_GT(r.best_validation_loss, 0.0);
}

TEST(Train, RefitUsesEverySampleForTheChosenStepCount) {
    SampleSet s = grid_samples(8, 8, [](double x, double t) { return x + 0.5 * t; });
    Rng rng(3);
    for (auto& p : s.points) p.u += 0.3 * rng.symmetric();
    TrainConfig c;
    c.iterations = 20000;
    c.learning_rate = 1e-2;
    c.validation_fraction = 0.25;
    c.patience = 1000;
    c.seed = 2;
    c.refit_full = true;
    const NetworkParams init = init_network({2, 30, 30, 1}, Activation::Tanh, 1);
    const TrainResult r = train(init, s, c);
    ASSERT_GT(r.best_step, 0);
    EXPECT_EQ(r.iterations_run, r.best_step);

    TrainConfig plain = c;
    plain.validation_fraction = 0.0;
    plain.refit_full = false;
    plain.iterations = r.best_step;
    const TrainResult direct = train(init, s, plain);
    for (std::size_t l = 0; l < init.layers(); ++l) {
        EXPECT_EQ(r.params.weights[l], direct.params.weights[l]);
        EXPECT_EQ(r.params.biases[l], direct.params.biases[l]);
    }
}

TEST(Train, NonFiniteLossRaisesWithStep) {
    const SampleSet s = grid_samples(5, 5, [](double x, double) { return 1e200 * x; });
    TrainConfig c;
    c.iterations = 10;
    c.output_scaling = false;
    try {
        train(init_network({2, 3, 1}, Activation::Tanh, 1), s, c);
        FAIL() << "expected TrainingError";
    } catch (const TrainingError& e) {
        EXPECT_GE(e.step(), 1);
    }
}

TEST(Train, ConfigValidation) {
    TrainConfig c;
    c.learning_rate = 0;
    EXPECT_THROW(c.validate(), ParameterError);
    c = {};
    c.adam_beta1 = 1.0;
    EXPECT_THROW(c.validate(), ParameterError);
    c = {};
    c.validation_fraction = 1.0;
    EXPECT_THROW(c.validate(), ParameterError);
}

TEST(Scaling, UnitBoxMapsTheDataDomain) {
    SampleSet s;
    s.points = {{0, 0, 1}, {1000, 200, 3}, {500, 50, 2}};
    const NetworkParams p = fit_scaling(init_network({2, 3, 1}, Activation::Tanh, 1), s, InputScaling::UnitBox, true);
    EXPECT_DOUBLE_EQ(p.x_map.apply(0.0), -1.0);
    EXPECT_DOUBLE_EQ(p.x_map.apply(1000.0), 1.0);
    EXPECT_DOUBLE_EQ(p.t_map.apply(200.0), 1.0);
    EXPECT_DOUBLE_EQ(p.output.shift, 2.0);
    EXPECT_TRUE(p.domain.known);
    EXPECT_EQ(p.domain.x_hi, 1000.0);
}

TEST(NetworkIo, JsonRoundTripIsExact) {
    const NetworkParams p = scaled_random_net(Activation::Sin, 8);
    EXPECT_EQ(network_from_json(network_to_json(p)), p);
    EXPECT_THROW(network_from_json("{"), FormatError);
}
