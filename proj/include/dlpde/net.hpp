#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dlpde/core.hpp"
#include "dlpde/sampling.hpp"

namespace dlpde {

enum class Activation { Tanh, Sin };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

/// v -> (v - shift) * scale.
struct AffineMap {
    double shift = 0.0;
    double scale = 1.0;
    bool fitted = false;

    template <typename Scalar>
    Scalar apply(const Scalar& v) const { return (v - Scalar(shift)) * Scalar(scale); }
    bool operator==(const AffineMap&) const = default;
};

/// Axis-aligned bounds of the data a network was trained on.
struct TrainingDomain {
    double x_lo = 0.0, x_hi = 0.0, t_lo = 0.0, t_hi = 0.0;
    bool known = false;
    bool operator==(const TrainingDomain&) const = default;
};

/// Fully-connected network u(x, t). Hidden layers apply the activation
/// after the affine map; the output layer is affine only.
///
/// Inputs pass through x_map / t_map before the first layer and the raw
/// network output z is mapped back as u = output.shift + output.scale * z.
struct NetworkParams {
    std::vector<int> layer_sizes;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Activation activation = Activation::Tanh;
    AffineMap x_map;
    AffineMap t_map;
    /// Stored as (shift, scale) of u = shift + scale * z.
    AffineMap output;
    TrainingDomain domain;

    std::size_t layers() const { return weights.size(); }
    long parameter_count() const;
    void validate() const;
    bool operator==(const NetworkParams&) const = default;
};

/// Weights uniform with variance 1 / fan_in, biases zero. For Sin networks
/// the first-layer weights are multiplied by first_layer_frequency.
NetworkParams init_network(const std::vector<int>& layer_sizes, Activation activation,
                           std::uint64_t seed, double first_layer_frequency = 1.0);

/// "standard": [2, 20 x 7, 1] tanh. "kdv": [2, 50, 50, 50, 1] sin.
std::vector<int> preset_layer_sizes(const std::string& preset);
Activation preset_activation(const std::string& preset);
NetworkParams init_preset(const std::string& preset, std::uint64_t seed, double first_layer_frequency = 1.0);

namespace detail {

template <typename Scalar>
Scalar activate(Activation a, const Scalar& z) {
    using std::sin;
    using std::tanh;
    return a == Activation::Tanh ? tanh(z) : sin(z);
}

}  // namespace detail

/// Network value at one point. Scalar may be double, long double, or any
/// type with +, *, tanh and sin (the autodiff jets use this entry point).
template <typename Scalar>
Scalar forward(const NetworkParams& params, const Scalar& x, const Scalar& t) {
    std::vector<Scalar> z{params.x_map.apply(x), params.t_map.apply(t)};
    for (std::size_t l = 0; l < params.layers(); ++l) {
        const auto& W = params.weights[l];
        const auto& b = params.biases[l];
        const bool hidden = l + 1 < params.layers();
        std::vector<Scalar> next(static_cast<std::size_t>(W.rows()));
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            Scalar acc = Scalar(b(r));
            for (Eigen::Index c = 0; c < W.cols(); ++c) acc = acc + Scalar(W(r, c)) * z[static_cast<std::size_t>(c)];
            next[static_cast<std::size_t>(r)] = hidden ? detail::activate(params.activation, acc) : acc;
        }
        z = std::move(next);
    }
    return Scalar(params.output.shift) + Scalar(params.output.scale) * z[0];
}

/// Batched network values at (xs(k), ts(k)).
Eigen::VectorXd predict(const NetworkParams& params, const Eigen::VectorXd& xs, const Eigen::VectorXd& ts);

/// Sum of squared residuals over the samples.
double loss(const NetworkParams& params, const SampleSet& samples);

/// Gradient of the loss, shaped like the parameters.
struct NetworkGradient {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    double loss = 0.0;
};

NetworkGradient loss_gradient(const NetworkParams& params, const SampleSet& samples);

enum class InputScaling { None, UnitBox };

struct TrainConfig {
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    long iterations = 50000;
    /// 0 selects full batch up to full_batch_limit points and minibatch_size above it.
    long batch = 0;
    long full_batch_limit = 26000;
    long minibatch_size = 4096;
    std::uint64_t seed = 0;
    InputScaling input_scaling = InputScaling::UnitBox;
    /// Standardize targets by their mean and standard deviation.
    bool output_scaling = true;
    /// Loss is recorded every history_every iterations.
    long history_every = 100;
    /// Stop when the best loss improved by less than early_stop_tol (relative)
    /// over the last early_stop_window steps.
    long early_stop_window = 2000;
    double early_stop_tol = 1e-10;
    /// Step decay: lr *= lr_decay_factor every lr_decay_every iterations (0 disables).
    long lr_decay_every = 0;
    double lr_decay_factor = 1.0;
    /// Fraction of samples held out for validation (0 disables). When on, the
    /// parameters with the lowest validation loss are returned and training
    /// stops after `patience` iterations without a new best.
    double validation_fraction = 0.0;
    long patience = 5000;
    /// With a holdout: retrain from the initial parameters on every sample
    /// for the best step count, and return that network instead.
    bool refit_full = false;

    void validate() const;
};

struct LossRecord {
    long step = 0;
    double loss = 0.0;
};

struct TrainResult {
    NetworkParams params;
    std::vector<LossRecord> history;
    long iterations_run = 0;
    bool early_stopped = false;
    /// Step whose parameters were returned (last step without validation).
    long best_step = 0;
    double best_validation_loss = 0.0;
};

/// Fits input/output maps (where not already fitted) to the samples.
NetworkParams fit_scaling(const NetworkParams& params, const SampleSet& samples, InputScaling input,
                          bool output_scaling);

/// Adam on the sum-of-squares loss. Deterministic for a given seed.
/// Throws TrainingError if the loss becomes non-finite.
TrainResult train(const NetworkParams& params, const SampleSet& samples, const TrainConfig& config);

void save_network(const std::string& path, const NetworkParams& params);
NetworkParams load_network(const std::string& path);
std::string network_to_json(const NetworkParams& params);
NetworkParams network_from_json(const std::string& text);

}  // namespace dlpde
