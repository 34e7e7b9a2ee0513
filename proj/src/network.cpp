#include "fcmdnn/network.hpp"

#include "fcmdnn/error.hpp"
#include "fcmdnn/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fcmdnn {

std::string to_string(Activation a) {
    switch (a) {
    case Activation::maxout: return "maxout";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
    case Activation::linear: return "linear";
    }
    return "unknown";
}

Activation activation_from_string(const std::string& name) {
    if (name == "maxout") return Activation::maxout;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "softmax") return Activation::softmax;
    if (name == "linear") return Activation::linear;
    throw Error(ErrorKind::configuration, "unknown activation '" + name + "'");
}

OptimizerConfig OptimizerConfig::momentum_sgd(double learning_rate, double momentum) {
    OptimizerConfig c;
    c.kind = OptimizerKind::momentum_sgd;
    c.learning_rate = learning_rate;
    c.momentum = momentum;
    return c;
}

OptimizerConfig OptimizerConfig::adaptive(double rho, double epsilon) {
    OptimizerConfig c;
    c.kind = OptimizerKind::adaptive;
    c.rho = rho;
    c.epsilon = epsilon;
    return c;
}

void OptimizerConfig::validate() const {
    if (kind == OptimizerKind::momentum_sgd) {
        if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorKind::configuration, "momentum must be in [0,1)");
        if (!(learning_rate > 0.0)) throw Error(ErrorKind::configuration, "learning rate must be > 0");
    } else {
        if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::configuration, "rho must be in (0,1)");
        if (!(epsilon > 0.0)) throw Error(ErrorKind::configuration, "epsilon must be > 0");
    }
}

void NetworkSpec::validate() const {
    if (layers.empty()) throw Error(ErrorKind::configuration, "network has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerSpec& layer = layers[l];
        if (layer.input_width < 1 || layer.output_width < 1) {
            throw Error(ErrorKind::configuration, "layer widths must be >= 1");
        }
        if (layer.activation == Activation::maxout && layer.pieces < 2) {
            throw Error(ErrorKind::configuration, "maxout needs >= 2 pieces");
        }
        if (l > 0 && layers[l - 1].output_width != layer.input_width) {
            throw Error(ErrorKind::configuration, "layer " + std::to_string(l) + " input width does not chain");
        }
        if (layer.activation == Activation::softmax && l + 1 != layers.size()) {
            throw Error(ErrorKind::configuration, "softmax is only valid as the output layer");
        }
    }
    const LayerSpec& head = layers.back();
    const bool sigmoid_head = head.activation == Activation::sigmoid && head.output_width == 1;
    const bool softmax_head = head.activation == Activation::softmax && head.output_width >= 2;
    if (!sigmoid_head && !softmax_head) {
        throw Error(ErrorKind::configuration, "output layer must be sigmoid (1 unit) or softmax (>= 2 units)");
    }
    if (!(l1 >= 0.0) || !(l2 >= 0.0)) throw Error(ErrorKind::configuration, "regularization must be >= 0");
    if (epochs < 0) throw Error(ErrorKind::configuration, "epochs must be >= 0");
    if (batch_size < 0) throw Error(ErrorKind::configuration, "batch_size must be >= 0 (0 = full batch)");
    optimizer.validate();
}

NetworkSpec make_network_spec(int input_width, const std::vector<int>& hidden, Activation hidden_activation,
                              int classes) {
    NetworkSpec spec;
    int width = input_width;
    for (const int h : hidden) {
        spec.layers.push_back({width, h, hidden_activation, 2});
        width = h;
    }
    if (classes == 2) {
        spec.layers.push_back({width, 1, Activation::sigmoid, 2});
    } else {
        spec.layers.push_back({width, classes, Activation::softmax, 2});
    }
    return spec;
}

ParamSet zeros_like(const ParamSet& params) {
    ParamSet out(params.size());
    for (std::size_t l = 0; l < params.size(); ++l) {
        for (const auto& w : params[l].weights) out[l].weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        for (const auto& b : params[l].biases) out[l].biases.push_back(Eigen::VectorXd::Zero(b.size()));
    }
    return out;
}

NetworkParams initialize(const NetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    NetworkParams params;
    for (const LayerSpec& layer : spec.layers) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(layer.input_width));
        LayerParams lp;
        for (int p = 0; p < layer.piece_count(); ++p) {
            Eigen::MatrixXd w(layer.output_width, layer.input_width);
            // Column-major fill order is part of the determinism contract.
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-scale, scale);
            }
            Eigen::VectorXd b(layer.output_width);
            for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-scale, scale);
            lp.weights.push_back(std::move(w));
            lp.biases.push_back(std::move(b));
        }
        params.layers.push_back(std::move(lp));
    }
    params.accum_a = zeros_like(params.layers);
    if (spec.optimizer.kind == OptimizerKind::adaptive) params.accum_b = zeros_like(params.layers);
    return params;
}

namespace {

void check_set(const NetworkSpec& spec, const ParamSet& set, const char* what) {
    if (set.size() != spec.layers.size()) {
        throw Error(ErrorKind::shape_mismatch, std::string(what) + " has the wrong number of layers");
    }
    for (std::size_t l = 0; l < set.size(); ++l) {
        const LayerSpec& layer = spec.layers[l];
        const auto pieces = static_cast<std::size_t>(layer.piece_count());
        if (set[l].weights.size() != pieces || set[l].biases.size() != pieces) {
            throw Error(ErrorKind::shape_mismatch, std::string(what) + " layer " + std::to_string(l) +
                                                       " has the wrong number of pieces");
        }
        for (std::size_t p = 0; p < pieces; ++p) {
            if (set[l].weights[p].rows() != layer.output_width || set[l].weights[p].cols() != layer.input_width ||
                set[l].biases[p].size() != layer.output_width) {
                throw Error(ErrorKind::shape_mismatch,
                            std::string(what) + " layer " + std::to_string(l) + " has the wrong shape");
            }
            if (!set[l].weights[p].allFinite() || !set[l].biases[p].allFinite()) {
                throw Error(ErrorKind::domain, std::string(what) + " contains non-finite values");
            }
        }
    }
}

} // namespace

void check_params(const NetworkSpec& spec, const NetworkParams& params) {
    check_set(spec, params.layers, "weights");
    check_set(spec, params.accum_a, "optimizer state");
    if (spec.optimizer.kind == OptimizerKind::adaptive) check_set(spec, params.accum_b, "optimizer state");
}

double sigmoid(double s) noexcept {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

double cross_entropy(double p, int y) {
    if (y != 0 && y != 1) throw Error(ErrorKind::domain, "binary target must be 0 or 1");
    const double q = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
    return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

double cross_entropy(const Eigen::VectorXd& predicted, const Eigen::VectorXd& target) {
    if (predicted.size() != target.size()) throw Error(ErrorKind::shape_mismatch, "prediction/target size differ");
    Eigen::Index hot = -1;
    for (Eigen::Index i = 0; i < target.size(); ++i) {
        if (target(i) == 1.0) {
            if (hot >= 0) throw Error(ErrorKind::domain, "target is not one-hot");
            hot = i;
        } else if (target(i) != 0.0) {
            throw Error(ErrorKind::domain, "target is not one-hot");
        }
    }
    if (hot < 0) throw Error(ErrorKind::domain, "target is not one-hot");
    return -std::log(std::clamp(predicted(hot), kProbabilityClamp, 1.0 - kProbabilityClamp));
}

Eigen::VectorXd maxout_forward(const Eigen::VectorXd& x, const std::vector<Eigen::MatrixXd>& weights,
                               const std::vector<Eigen::VectorXd>& biases, Eigen::VectorXi* winners) {
    if (weights.size() < 2 || weights.size() != biases.size()) {
        throw Error(ErrorKind::shape_mismatch, "maxout needs >= 2 pieces with one bias each");
    }
    for (std::size_t p = 0; p < weights.size(); ++p) {
        if (weights[p].rows() != weights[0].rows() || weights[p].cols() != x.size() ||
            biases[p].size() != weights[0].rows()) {
            throw Error(ErrorKind::shape_mismatch, "maxout pieces must share one shape matching the input");
        }
    }
    Eigen::VectorXd out = weights[0] * x + biases[0];
    Eigen::VectorXi win = Eigen::VectorXi::Zero(out.size());
    for (std::size_t p = 1; p < weights.size(); ++p) {
        const Eigen::VectorXd z = weights[p] * x + biases[p];
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            if (z(i) > out(i)) {
                out(i) = z(i);
                win(i) = static_cast<int>(p);
            }
        }
    }
    if (winners) *winners = std::move(win);
    return out;
}

Trace forward_batch(const NetworkSpec& spec, const NetworkParams& params, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != spec.input_width()) {
        throw Error(ErrorKind::shape_mismatch, "input width " + std::to_string(inputs.rows()) +
                                                   " does not match network input " +
                                                   std::to_string(spec.input_width()));
    }
    if (params.layers.size() != spec.layers.size()) {
        throw Error(ErrorKind::shape_mismatch, "params do not match the network spec");
    }
    Trace trace;
    trace.activations.reserve(spec.layers.size() + 1);
    trace.winners.resize(spec.layers.size());
    trace.activations.push_back(inputs);
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const LayerSpec& layer = spec.layers[l];
        const LayerParams& lp = params.layers[l];
        const Eigen::MatrixXd& a = trace.activations.back();
        Eigen::MatrixXd z = (lp.weights[0] * a).colwise() + lp.biases[0];
        switch (layer.activation) {
        case Activation::maxout: {
            Eigen::MatrixXi win = Eigen::MatrixXi::Zero(z.rows(), z.cols());
            for (std::size_t p = 1; p < lp.weights.size(); ++p) {
                const Eigen::MatrixXd zp = (lp.weights[p] * a).colwise() + lp.biases[p];
                for (Eigen::Index j = 0; j < z.cols(); ++j) {
                    for (Eigen::Index i = 0; i < z.rows(); ++i) {
                        if (zp(i, j) > z(i, j)) {
                            z(i, j) = zp(i, j);
                            win(i, j) = static_cast<int>(p);
                        }
                    }
                }
            }
            trace.winners[l] = std::move(win);
            break;
        }
        case Activation::sigmoid:
            z = z.unaryExpr([](double s) { return sigmoid(s); });
            break;
        case Activation::softmax:
            for (Eigen::Index j = 0; j < z.cols(); ++j) {
                auto col = z.col(j);
                const double m = col.maxCoeff();
                col = (col.array() - m).exp().matrix();
                col /= col.sum();
            }
            break;
        case Activation::linear:
            break;
        }
        trace.activations.push_back(std::move(z));
    }
    return trace;
}

ForwardResult forward(const NetworkSpec& spec, const NetworkParams& params, const Eigen::VectorXd& x) {
    ForwardResult r;
    r.trace = forward_batch(spec, params, x);
    r.output = r.trace.activations.back().col(0);
    return r;
}

Eigen::MatrixXd make_targets(const NetworkSpec& spec, const std::vector<int>& labels) {
    const int classes = spec.class_count();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(spec.output_width(), static_cast<Eigen::Index>(labels.size()));
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const int y = labels[j];
        if (y < 0 || y >= classes) throw Error(ErrorKind::domain, "label " + std::to_string(y) + " out of range");
        if (spec.binary_head()) {
            t(0, static_cast<Eigen::Index>(j)) = y;
        } else {
            t(y, static_cast<Eigen::Index>(j)) = 1.0;
        }
    }
    return t;
}

namespace {

double data_loss(const NetworkSpec& spec, const Eigen::MatrixXd& output, const Eigen::MatrixXd& targets) {
    if (output.cols() == 0) return 0.0;
    double total = 0.0;
    for (Eigen::Index j = 0; j < output.cols(); ++j) {
        if (spec.binary_head()) {
            total += cross_entropy(output(0, j), static_cast<int>(targets(0, j)));
        } else {
            total += cross_entropy(output.col(j), targets.col(j));
        }
    }
    return total / static_cast<double>(output.cols());
}

} // namespace

double batch_loss(const NetworkSpec& spec, const NetworkParams& params, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, bool with_regularization) {
    const Trace trace = forward_batch(spec, params, inputs);
    double loss = data_loss(spec, trace.activations.back(), targets);
    if (with_regularization && (spec.l1 > 0.0 || spec.l2 > 0.0)) {
        for (const auto& lp : params.layers) {
            for (const auto& w : lp.weights) {
                loss += spec.l1 * w.array().abs().sum() + 0.5 * spec.l2 * w.squaredNorm();
            }
        }
    }
    return loss;
}

ParamSet backward(const NetworkSpec& spec, const NetworkParams& params, const Trace& trace,
                  const Eigen::MatrixXd& targets) {
    const std::size_t depth = spec.layers.size();
    if (trace.activations.size() != depth + 1 || trace.winners.size() != depth ||
        params.layers.size() != depth) {
        throw Error(ErrorKind::shape_mismatch, "trace does not match the network");
    }
    const Eigen::MatrixXd& output = trace.activations.back();
    if (targets.rows() != output.rows() || targets.cols() != output.cols()) {
        throw Error(ErrorKind::shape_mismatch, "targets do not match the network output");
    }
    for (std::size_t l = 0; l < depth; ++l) {
        if (trace.activations[l + 1].rows() != spec.layers[l].output_width ||
            (spec.layers[l].activation == Activation::maxout &&
             (trace.winners[l].rows() != spec.layers[l].output_width || trace.winners[l].cols() != output.cols()))) {
            throw Error(ErrorKind::shape_mismatch, "stale trace for layer " + std::to_string(l));
        }
    }

    const double inv_batch = output.cols() > 0 ? 1.0 / static_cast<double>(output.cols()) : 0.0;
    ParamSet grads(depth);
    // Cross-entropy over a sigmoid or softmax head: dL/dz = p - y.
    Eigen::MatrixXd delta = (output - targets) * inv_batch;

    for (std::size_t l = depth; l-- > 0;) {
        const LayerSpec& layer = spec.layers[l];
        const LayerParams& lp = params.layers[l];
        const Eigen::MatrixXd& input = trace.activations[l];
        LayerParams& g = grads[l];
        Eigen::MatrixXd upstream;
        if (layer.activation == Activation::maxout) {
            const Eigen::MatrixXi& win = trace.winners[l];
            for (int p = 0; p < layer.pieces; ++p) {
                const Eigen::MatrixXd dp = (win.array() == p).cast<double>() * delta.array();
                g.weights.push_back(dp * input.transpose());
                g.biases.push_back(dp.rowwise().sum());
                if (l > 0) {
                    if (p == 0) {
                        upstream = lp.weights[0].transpose() * dp;
                    } else {
                        upstream.noalias() += lp.weights[static_cast<std::size_t>(p)].transpose() * dp;
                    }
                }
            }
        } else {
            g.weights.push_back(delta * input.transpose());
            g.biases.push_back(delta.rowwise().sum());
            if (l > 0) upstream = lp.weights[0].transpose() * delta;
        }
        for (std::size_t p = 0; p < g.weights.size(); ++p) {
            const Eigen::MatrixXd& w = lp.weights[p];
            if (spec.l1 > 0.0) g.weights[p].array() += spec.l1 * w.array().sign();
            if (spec.l2 > 0.0) g.weights[p] += spec.l2 * w;
        }
        if (l == 0) break;

        // Convert dL/d(output of layer l-1) into dL/d(pre-activation) of that layer.
        const LayerSpec& below = spec.layers[l - 1];
        const Eigen::MatrixXd& a = trace.activations[l];
        switch (below.activation) {
        case Activation::sigmoid:
            delta = upstream.array() * a.array() * (1.0 - a.array());
            break;
        case Activation::maxout:
        case Activation::linear:
            delta = std::move(upstream);
            break;
        case Activation::softmax:
            throw Error(ErrorKind::configuration, "softmax is only valid as the output layer");
        }
    }
    return grads;
}

namespace {

template <class F>
void for_each_tensor(NetworkParams& params, const ParamSet& grads, F&& f) {
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        for (std::size_t p = 0; p < params.layers[l].weights.size(); ++p) {
            f(params.layers[l].weights[p].array(), grads[l].weights[p].array(), params.accum_a[l].weights[p].array(),
              params.accum_b.empty() ? params.accum_a[l].weights[p].array() : params.accum_b[l].weights[p].array());
            f(params.layers[l].biases[p].array(), grads[l].biases[p].array(), params.accum_a[l].biases[p].array(),
              params.accum_b.empty() ? params.accum_a[l].biases[p].array() : params.accum_b[l].biases[p].array());
        }
    }
}

} // namespace

void optimizer_step(NetworkParams& params, const ParamSet& gradients, const OptimizerConfig& config) {
    if (gradients.size() != params.layers.size() || params.accum_a.size() != params.layers.size() ||
        (config.kind == OptimizerKind::adaptive && params.accum_b.size() != params.layers.size())) {
        throw Error(ErrorKind::shape_mismatch, "gradient/accumulator shapes do not match the parameters");
    }
    for (std::size_t l = 0; l < gradients.size(); ++l) {
        for (std::size_t p = 0; p < gradients[l].weights.size(); ++p) {
            if (!gradients[l].weights[p].allFinite() || !gradients[l].biases[p].allFinite()) {
                throw Error(ErrorKind::training_diverged, "non-finite gradient");
            }
        }
    }
    if (config.kind == OptimizerKind::momentum_sgd) {
        const double mu = config.momentum;
        const double eta = config.learning_rate;
        for_each_tensor(params, gradients, [&](auto w, auto g, auto v, auto) {
            v = mu * v - eta * g;
            w += v;
        });
    } else {
        // Per-weight adaptive rate from decayed averages of squared gradients and squared updates.
        const double rho = config.rho;
        const double eps = config.epsilon;
        for_each_tensor(params, gradients, [&](auto w, auto g, auto eg2, auto edx2) {
            eg2 = rho * eg2 + (1.0 - rho) * g.square();
            const auto dx = (-((edx2 + eps).sqrt() / (eg2 + eps).sqrt()) * g).eval();
            edx2 = rho * edx2 + (1.0 - rho) * dx.square();
            w += dx;
        });
    }
}

namespace {

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& by_column, const std::vector<int>& order, std::size_t begin,
                               std::size_t end) {
    Eigen::MatrixXd out(by_column.rows(), static_cast<Eigen::Index>(end - begin));
    for (std::size_t j = begin; j < end; ++j) {
        out.col(static_cast<Eigen::Index>(j - begin)) = by_column.col(order[j]);
    }
    return out;
}

} // namespace

TrainResult train(const NetworkSpec& spec, const LabeledData& train_set, const LabeledData& validation_set) {
    spec.validate();
    if (train_set.features.rows() == 0) throw Error(ErrorKind::insufficient_data, "empty training set");
    if (static_cast<std::size_t>(train_set.features.rows()) != train_set.labels.size() ||
        static_cast<std::size_t>(validation_set.features.rows()) != validation_set.labels.size()) {
        throw Error(ErrorKind::shape_mismatch, "features and labels differ in length");
    }
    if (train_set.features.cols() != spec.input_width() ||
        (validation_set.features.rows() > 0 && validation_set.features.cols() != spec.input_width())) {
        throw Error(ErrorKind::shape_mismatch, "feature width does not match the network input");
    }

    TrainResult result;
    result.params = initialize(spec, spec.seed);
    Rng shuffle_rng(mix64(spec.seed));

    const Eigen::MatrixXd x_train = train_set.features.transpose();
    const Eigen::MatrixXd y_train = make_targets(spec, train_set.labels);
    const Eigen::MatrixXd x_val = validation_set.features.transpose();
    const Eigen::MatrixXd y_val = make_targets(spec, validation_set.labels);

    const auto n = static_cast<std::size_t>(x_train.cols());
    const std::size_t batch = spec.batch_size == kFullBatch ? n : static_cast<std::size_t>(spec.batch_size);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
        if (spec.shuffle) shuffle_rng.shuffle(std::span<int>(order));
        try {
            for (std::size_t begin = 0; begin < n; begin += batch) {
                const std::size_t end = std::min(n, begin + batch);
                const Eigen::MatrixXd xb = gather_columns(x_train, order, begin, end);
                const Eigen::MatrixXd yb = gather_columns(y_train, order, begin, end);
                const Trace trace = forward_batch(spec, result.params, xb);
                optimizer_step(result.params, backward(spec, result.params, trace, yb), spec.optimizer);
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::training_diverged) throw;
            throw Error(ErrorKind::training_diverged, "epoch " + std::to_string(epoch) + ": " + e.what());
        }
        EpochLoss record;
        record.epoch = epoch;
        record.train_loss = batch_loss(spec, result.params, x_train, y_train, false);
        if (x_val.cols() > 0) record.validation_loss = batch_loss(spec, result.params, x_val, y_val, false);
        if (!std::isfinite(record.train_loss)) {
            throw Error(ErrorKind::training_diverged, "non-finite training loss at epoch " + std::to_string(epoch));
        }
        result.history.push_back(record);
    }
    return result;
}

Prediction predict(const NetworkSpec& spec, const NetworkParams& params, const Eigen::VectorXd& x) {
    return predict_batch(spec, params, x.transpose()).front();
}


std::vector<Prediction> predict_batch(const NetworkSpec& spec, const NetworkParams& params,
                                      const Eigen::MatrixXd& features) {
    // Column at a time: a prediction never depends on which other rows share the call.
    std::vector<Prediction> preds;
    preds.reserve(static_cast<std::size_t>(features.rows()));
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
        const Trace trace = forward_batch(spec, params, features.row(r).transpose());
        Prediction p;
        p.score = trace.activations.back().col(0);
        if (spec.binary_head()) {
            p.label = p.score(0) >= 0.5 ? 1 : 0;
        } else {
            Eigen::Index best = 0;
            for (Eigen::Index i = 1; i < p.score.size(); ++i) {
                if (p.score(i) > p.score(best)) best = i;
            }
            p.label = static_cast<int>(best);
        }
        preds.push_back(std::move(p));
    }
    return preds;
}

} // namespace fcmdnn
