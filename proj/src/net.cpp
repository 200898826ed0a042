#include "dlpde/net.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "activation_kernels.hpp"

namespace dlpde {

std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "sin"; }

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "sin") return Activation::Sin;
    throw ParameterError("unknown activation '" + name + "'");
}

long NetworkParams::parameter_count() const {
    long n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

void NetworkParams::validate() const {
    if (layer_sizes.size() < 3) throw ParameterError("network needs at least one hidden layer");
    if (layer_sizes.front() != 2 || layer_sizes.back() != 1)
        throw ParameterError("network maps (x, t) to a scalar: sizes must start at 2 and end at 1");
    if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size())
        throw ParameterError("network layer count does not match its sizes");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l] ||
            biases[l].size() != layer_sizes[l + 1])
            throw ParameterError("network layer " + std::to_string(l) + " has inconsistent shape");
        if (!weights[l].allFinite() || !biases[l].allFinite())
            throw ParameterError("network layer " + std::to_string(l) + " has non-finite entries");
    }
}

NetworkParams init_network(const std::vector<int>& layer_sizes, Activation activation,
                           std::uint64_t seed, double first_layer_frequency) {
    NetworkParams p;
    p.layer_sizes = layer_sizes;
    p.activation = activation;
    if (layer_sizes.size() < 3) throw ParameterError("network needs at least one hidden layer");
    for (int s : layer_sizes)
        if (s < 1) throw ParameterError("layer sizes must be positive");
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        // Uniform on [-a, a] has variance a^2 / 3 = 1 / fan_in.
        double a = std::sqrt(3.0 / fan_in);
        if (l == 0 && activation == Activation::Sin) a *= first_layer_frequency;
        Eigen::MatrixXd W(fan_out, fan_in);
        for (Eigen::Index c = 0; c < W.cols(); ++c)
            for (Eigen::Index r = 0; r < W.rows(); ++r) W(r, c) = a * rng.symmetric();
        p.weights.push_back(std::move(W));
        p.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    p.validate();
    return p;
}

std::vector<int> preset_layer_sizes(const std::string& preset) {
    if (preset == "standard") return {2, 20, 20, 20, 20, 20, 20, 20, 1};
    if (preset == "kdv") return {2, 50, 50, 50, 1};
    throw ParameterError("unknown network preset '" + preset + "'");
}

Activation preset_activation(const std::string& preset) {
    if (preset == "standard") return Activation::Tanh;
    if (preset == "kdv") return Activation::Sin;
    throw ParameterError("unknown network preset '" + preset + "'");
}

NetworkParams init_preset(const std::string& preset, std::uint64_t seed, double first_layer_frequency) {
    return init_network(preset_layer_sizes(preset), preset_activation(preset), seed, first_layer_frequency);
}

namespace {

/// Scaled 2 x N input matrix.
Eigen::MatrixXd scaled_inputs(const NetworkParams& p, const Eigen::VectorXd& xs, const Eigen::VectorXd& ts) {
    Eigen::MatrixXd X(2, xs.size());
    X.row(0) = ((xs.array() - p.x_map.shift) * p.x_map.scale).matrix().transpose();
    X.row(1) = ((ts.array() - p.t_map.shift) * p.t_map.scale).matrix().transpose();
    return X;
}

void split_samples(const SampleSet& samples, Eigen::VectorXd& xs, Eigen::VectorXd& ts, Eigen::VectorXd& us) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    xs.resize(n);
    ts.resize(n);
    us.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& s = samples.points[static_cast<std::size_t>(k)];
        xs(k) = s.x;
        ts(k) = s.t;
        us(k) = s.u;
    }
}

/// Activations and activation derivatives of one batched forward pass.
struct ForwardPass {
    std::vector<Eigen::MatrixXd> activations;  // activations[0] is the input
    std::vector<Eigen::MatrixXd> slopes;       // slopes[l] = sigma'(Z) for activations[l], l >= 1
    Eigen::RowVectorXd output;                 // raw z_L
};

void run_forward(const NetworkParams& p, const Eigen::MatrixXd& X, ForwardPass& pass) {
    const std::size_t L = p.layers();
    pass.activations.resize(L);
    pass.slopes.resize(L);
    pass.activations[0] = X;
    for (std::size_t l = 0; l + 1 < L; ++l) {
        Eigen::MatrixXd Z = p.weights[l] * pass.activations[l];
        Z.colwise() += p.biases[l];
        auto& A = pass.activations[l + 1];
        auto& D = pass.slopes[l + 1];
        A.resize(Z.rows(), Z.cols());
        D.resize(Z.rows(), Z.cols());
        const auto n = static_cast<std::size_t>(Z.size());
        if (p.activation == Activation::Tanh)
            kernels::tanh_with_derivative(Z.data(), A.data(), D.data(), n);
        else
            kernels::sincos(Z.data(), A.data(), D.data(), n);
    }
    pass.output = (p.weights[L - 1] * pass.activations[L - 1]).row(0);
    pass.output.array() += p.biases[L - 1](0);
}

/// Back-propagates dLoss/dz_L = seed through the recorded pass.
void run_backward(const NetworkParams& p, const ForwardPass& pass, const Eigen::RowVectorXd& seed,
                  NetworkGradient& g) {
    const std::size_t L = p.layers();
    g.weights.resize(L);
    g.biases.resize(L);
    Eigen::MatrixXd delta = seed;
    for (std::size_t l = L; l-- > 0;) {
        g.weights[l].noalias() = delta * pass.activations[l].transpose();
        g.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = p.weights[l].transpose() * delta;
            delta = back.cwiseProduct(pass.slopes[l]);
        }
    }
}

}  // namespace

Eigen::VectorXd predict(const NetworkParams& params, const Eigen::VectorXd& xs, const Eigen::VectorXd& ts) {
    if (xs.size() != ts.size()) throw ParameterError("predict: coordinate vectors differ in length");
    Eigen::MatrixXd A = scaled_inputs(params, xs, ts);
    const std::size_t L = params.layers();
    for (std::size_t l = 0; l < L; ++l) {
        Eigen::MatrixXd Z = params.weights[l] * A;
        Z.colwise() += params.biases[l];
        if (l + 1 < L)
            A = params.activation == Activation::Tanh ? Eigen::MatrixXd(Z.array().tanh())
                                                      : Eigen::MatrixXd(Z.array().sin());
        else
            A = std::move(Z);
    }
    return (params.output.shift + params.output.scale * A.row(0).array()).matrix().transpose();
}

double loss(const NetworkParams& params, const SampleSet& samples) {
    if (samples.size() == 0) throw ParameterError("loss: empty sample set");
    Eigen::VectorXd xs, ts, us;
    split_samples(samples, xs, ts, us);
    return (predict(params, xs, ts) - us).squaredNorm();
}

NetworkGradient loss_gradient(const NetworkParams& params, const SampleSet& samples) {
    if (samples.size() == 0) throw ParameterError("loss_gradient: empty sample set");
    params.validate();
    Eigen::VectorXd xs, ts, us;
    split_samples(samples, xs, ts, us);
    ForwardPass pass;
    run_forward(params, scaled_inputs(params, xs, ts), pass);
    const double s = params.output.scale;
    Eigen::RowVectorXd residual = (params.output.shift + s * pass.output.array()).matrix() - us.transpose();
    NetworkGradient g;
    g.loss = residual.squaredNorm();
    run_backward(params, pass, 2.0 * s * residual, g);
    return g;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0))
        throw ParameterError("Adam betas must lie in (0, 1)");
    if (!(adam_eps > 0.0)) throw ParameterError("adam_eps must be positive");
    if (iterations < 0) throw ParameterError("iterations must be >= 0");
    if (batch < 0 || minibatch_size < 1 || history_every < 1 || early_stop_window < 0)
        throw ParameterError("invalid batch/history settings");
    if (lr_decay_every < 0 || !(lr_decay_factor > 0.0)) throw ParameterError("invalid learning-rate decay");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
        throw ParameterError("validation_fraction must lie in [0, 1)");
    if (patience < 1) throw ParameterError("patience must be >= 1");
}

NetworkParams fit_scaling(const NetworkParams& params, const SampleSet& samples, InputScaling input,
                          bool output_scaling) {
    if (samples.size() == 0) throw ParameterError("fit_scaling: empty sample set");
    NetworkParams p = params;
    Eigen::VectorXd xs, ts, us;
    split_samples(samples, xs, ts, us);
    p.domain = {xs.minCoeff(), xs.maxCoeff(), ts.minCoeff(), ts.maxCoeff(), true};
    auto unit_box = [](double lo, double hi) {
        AffineMap m;
        m.shift = 0.5 * (lo + hi);
        m.scale = hi > lo ? 2.0 / (hi - lo) : 1.0;
        m.fitted = true;
        return m;
    };
    if (input == InputScaling::UnitBox) {
        if (!p.x_map.fitted) p.x_map = unit_box(p.domain.x_lo, p.domain.x_hi);
        if (!p.t_map.fitted) p.t_map = unit_box(p.domain.t_lo, p.domain.t_hi);
    }
    if (output_scaling && !p.output.fitted) {
        const double mean = us.mean();
        const double sd = std::sqrt((us.array() - mean).square().mean());
        p.output.shift = mean;
        p.output.scale = sd > 0.0 ? sd : 1.0;
        p.output.fitted = true;
    }
    return p;
}

TrainResult train(const NetworkParams& initial, const SampleSet& samples, const TrainConfig& config) {
    config.validate();
    initial.validate();
    if (samples.size() == 0) throw ParameterError("train: empty sample set");
    TrainResult result;
    result.params = initial;
    if (config.iterations == 0) return result;

    NetworkParams& p = result.params;
    p = fit_scaling(p, samples, config.input_scaling, config.output_scaling);

    Eigen::VectorXd xs, ts, us;
    split_samples(samples, xs, ts, us);
    const Eigen::MatrixXd X_all = scaled_inputs(p, xs, ts);
    const Eigen::RowVectorXd y_all = ((us.array() - p.output.shift) / p.output.scale).matrix().transpose();
    const double s2 = p.output.scale * p.output.scale;

    // Seeded holdout; the rest is the training set.
    const auto n_all = static_cast<long>(samples.size());
    long n_val = 0;
    if (config.validation_fraction > 0.0) {
        n_val = std::lround(config.validation_fraction * static_cast<double>(n_all));
        if (n_val < 1 || n_val >= n_all) throw ParameterError("train: validation split leaves an empty set");
    }
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n_all));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    if (n_val > 0) {
        Rng split(mix_seed(config.seed, 8));
        for (long k = n_all - 1; k > 0; --k)
            std::swap(perm[static_cast<std::size_t>(k)], perm[split.below(static_cast<std::uint64_t>(k + 1))]);
        std::sort(perm.begin(), perm.begin() + n_val);
        std::sort(perm.begin() + n_val, perm.end());
    }
    const auto n = n_all - n_val;
    Eigen::MatrixXd X(2, n), Xv(2, n_val);
    Eigen::RowVectorXd targets(n), yv(n_val);
    for (long k = 0; k < n_val; ++k) {
        Xv.col(k) = X_all.col(perm[static_cast<std::size_t>(k)]);
        yv(k) = y_all(perm[static_cast<std::size_t>(k)]);
    }
    for (long k = 0; k < n; ++k) {
        X.col(k) = X_all.col(perm[static_cast<std::size_t>(n_val + k)]);
        targets(k) = y_all(perm[static_cast<std::size_t>(n_val + k)]);
    }
    NetworkParams best_params;
    double best_val = std::numeric_limits<double>::infinity();
    ForwardPass val_pass;

    long batch = config.batch;
    if (batch == 0) batch = n <= config.full_batch_limit ? n : config.minibatch_size;
    batch = std::min(batch, n);
    const bool full = batch == n;

    const std::size_t L = p.layers();
    std::vector<Eigen::MatrixXd> mW(L), vW(L);
    std::vector<Eigen::VectorXd> mb(L), vb(L);
    for (std::size_t l = 0; l < L; ++l) {
        mW[l] = Eigen::MatrixXd::Zero(p.weights[l].rows(), p.weights[l].cols());
        vW[l] = mW[l];
        mb[l] = Eigen::VectorXd::Zero(p.biases[l].size());
        vb[l] = mb[l];
    }

    Rng rng(mix_seed(config.seed, 7));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    long cursor = n;
    Eigen::MatrixXd Xb;
    Eigen::RowVectorXd yb;
    if (full) {
        Xb = X;
        yb = targets;
    }

    ForwardPass pass;
    NetworkGradient g;
    double b1t = 1.0, b2t = 1.0;
    double lr = config.learning_rate;
    double epoch_loss = 0.0, reported = 0.0;
    long epoch_points = 0;
    double best = std::numeric_limits<double>::infinity();
    double best_at_mark = 0.0;

    for (long step = 1; step <= config.iterations; ++step) {
        if (!full) {
            if (cursor + batch > n) {
                for (long k = n - 1; k > 0; --k)
                    std::swap(order[static_cast<std::size_t>(k)],
                              order[rng.below(static_cast<std::uint64_t>(k + 1))]);
                cursor = 0;
            }
            Xb.resize(2, batch);
            yb.resize(batch);
            for (long k = 0; k < batch; ++k) {
                const auto idx = order[static_cast<std::size_t>(cursor + k)];
                Xb.col(k) = X.col(idx);
                yb(k) = targets(idx);
            }
            cursor += batch;
        }
        run_forward(p, Xb, pass);
        const Eigen::RowVectorXd residual = pass.output - yb;
        const double batch_loss = s2 * residual.squaredNorm();
        if (!std::isfinite(batch_loss))
            throw TrainingError("loss became non-finite at step " + std::to_string(step), step);
        run_backward(p, pass, (2.0 * s2) * residual, g);

        b1t *= config.adam_beta1;
        b2t *= config.adam_beta2;
        const double step_size = lr * std::sqrt(1.0 - b2t) / (1.0 - b1t);
        // eps is applied to the bias-corrected second moment, as in the reference algorithm.
        const double eps_hat = config.adam_eps * std::sqrt(1.0 - b2t);
        auto adam = [&](auto& param, auto& m, auto& v, const auto& grad) {
            m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * grad;
            v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * grad.cwiseProduct(grad);
            param.array() -= step_size * m.array() / (v.array().sqrt() + eps_hat);
        };
        for (std::size_t l = 0; l < L; ++l) {
            adam(p.weights[l], mW[l], vW[l], g.weights[l]);
            adam(p.biases[l], mb[l], vb[l], g.biases[l]);
        }

        if (full) {
            reported = batch_loss;
        } else {
            epoch_loss += batch_loss;
            epoch_points += batch;
            reported = epoch_loss * static_cast<double>(n) / static_cast<double>(epoch_points);
            if (epoch_points >= n) {
                epoch_loss = 0.0;
                epoch_points = 0;
            }
        }
        if (step % config.history_every == 0 || step == config.iterations)
            result.history.push_back({step, reported});
        result.iterations_run = step;

        if (n_val > 0 && (step % config.history_every == 0 || step == config.iterations)) {
            run_forward(p, Xv, val_pass);
            const double v = s2 * (val_pass.output - yv).squaredNorm();
            if (v < best_val) {
                best_val = v;
                best_params = p;
                result.best_step = step;
            } else if (step - result.best_step >= config.patience) {
                result.early_stopped = true;
                break;
            }
        }

        if (config.lr_decay_every > 0 && step % config.lr_decay_every == 0) lr *= config.lr_decay_factor;

        best = std::min(best, reported);
        if (config.early_stop_window > 0 && step % config.early_stop_window == 0) {
            // Progress is judged on the best loss so far; Adam's transient spikes do not stop training.
            if (best_at_mark > 0.0 && (best_at_mark - best) / best_at_mark < config.early_stop_tol) {
                result.early_stopped = true;
                if (result.history.empty() || result.history.back().step != step)
                    result.history.push_back({step, reported});
                break;
            }
            best_at_mark = best;
        }
    }
    if (n_val > 0 && result.best_step > 0) {
        p = best_params;
        result.best_validation_loss = best_val;
        if (config.refit_full) {
            TrainConfig again = config;
            again.validation_fraction = 0.0;
            again.iterations = result.best_step;
            TrainResult refit = train(initial, samples, again);
            refit.best_step = result.best_step;
            refit.best_validation_loss = best_val;
            refit.early_stopped = result.early_stopped;
            return refit;
        }
    } else {
        result.best_step = result.iterations_run;
    }
    p.validate();
    return result;
}

namespace {

using nlohmann::json;

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json map_json(const AffineMap& m) { return {{"shift", m.shift}, {"scale", m.scale}, {"fitted", m.fitted}}; }

AffineMap map_from(const json& j) {
    return {j.at("shift").get<double>(), j.at("scale").get<double>(), j.at("fitted").get<bool>()};
}

}  // namespace

std::string network_to_json(const NetworkParams& p) {
    json j;
    j["layer_sizes"] = p.layer_sizes;
    j["activation"] = to_string(p.activation);
    j["x_map"] = map_json(p.x_map);
    j["t_map"] = map_json(p.t_map);
    j["output"] = map_json(p.output);
    j["domain"] = {{"x_lo", p.domain.x_lo}, {"x_hi", p.domain.x_hi}, {"t_lo", p.domain.t_lo},
                   {"t_hi", p.domain.t_hi}, {"known", p.domain.known}};
    json layers = json::array();
    for (std::size_t l = 0; l < p.layers(); ++l) {
        std::vector<double> b(p.biases[l].data(), p.biases[l].data() + p.biases[l].size());
        layers.push_back({{"weights", matrix_json(p.weights[l])}, {"biases", b}});
    }
    j["layers"] = std::move(layers);
    return j.dump(1);
}

NetworkParams network_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
        NetworkParams p;
        p.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
        p.activation = parse_activation(j.at("activation").get<std::string>());
        p.x_map = map_from(j.at("x_map"));
        p.t_map = map_from(j.at("t_map"));
        p.output = map_from(j.at("output"));
        const auto& d = j.at("domain");
        p.domain = {d.at("x_lo").get<double>(), d.at("x_hi").get<double>(), d.at("t_lo").get<double>(),
                    d.at("t_hi").get<double>(), d.at("known").get<bool>()};
        for (const auto& layer : j.at("layers")) {
            const auto& rows = layer.at("weights");
            const auto r = static_cast<Eigen::Index>(rows.size());
            const auto c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
            Eigen::MatrixXd W(r, c);
            for (Eigen::Index i = 0; i < r; ++i)
                for (Eigen::Index k = 0; k < c; ++k) W(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
            const auto b = layer.at("biases").get<std::vector<double>>();
            p.weights.push_back(std::move(W));
            p.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
        }
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw FormatError(std::string("network file: ") + e.what());
    }
}

void save_network(const std::string& path, const NetworkParams& params) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    os << network_to_json(params) << "\n";
}

NetworkParams load_network(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return network_from_json(ss.str());
}

}  // namespace dlpde
