#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fcmdnn {

enum class Activation { maxout, sigmoid, softmax, linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct LayerSpec {
    int input_width = 0;
    int output_width = 0;
    Activation activation = Activation::sigmoid;
    int pieces = 2; // maxout only

    int piece_count() const noexcept { return activation == Activation::maxout ? pieces : 1; }
};

enum class OptimizerKind { momentum_sgd, adaptive };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adaptive;
    double learning_rate = 0.01; // momentum_sgd
    double momentum = 0.2;       // momentum_sgd
    double rho = 0.99;           // adaptive
    double epsilon = 1.0e-8;     // adaptive

    static OptimizerConfig momentum_sgd(double learning_rate, double momentum);
    static OptimizerConfig adaptive(double rho, double epsilon);
    void validate() const;
};

enum class Loss { cross_entropy };

inline constexpr int kFullBatch = 0;

struct NetworkSpec {
    std::vector<LayerSpec> layers;
    Loss loss = Loss::cross_entropy;
    double l1 = 0.0;
    double l2 = 0.0;
    OptimizerConfig optimizer;
    int epochs = 50;
    int batch_size = kFullBatch; // kFullBatch: one step per epoch over the whole train set
    bool shuffle = true;
    std::uint64_t seed = 0;

    void validate() const;
    int input_width() const { return layers.front().input_width; }
    int output_width() const { return layers.back().output_width; }
    bool binary_head() const { return layers.back().activation == Activation::sigmoid; }
    /// Number of classes the head distinguishes (2 for the sigmoid head).
    int class_count() const { return binary_head() ? 2 : output_width(); }
};

/// Hidden layers of the given widths with a shared activation, then a
/// sigmoid head (classes == 2) or softmax head of width `classes`.
NetworkSpec make_network_spec(int input_width, const std::vector<int>& hidden, Activation hidden_activation,
                              int classes);

/// One weight matrix (out x in) and bias per piece; non-maxout layers have one piece.
struct LayerParams {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

using ParamSet = std::vector<LayerParams>;

ParamSet zeros_like(const ParamSet& params);

struct NetworkParams {
    ParamSet layers;
    /// momentum_sgd: velocity. adaptive: running mean of squared gradients.
    ParamSet accum_a;
    /// adaptive only: running mean of squared updates.
    ParamSet accum_b;
};

/// Seeded uniform weights and biases in +-1/sqrt(fan_in); zeroed accumulators.
NetworkParams initialize(const NetworkSpec& spec, std::uint64_t seed);

/// Throws shape_mismatch unless params match spec exactly, domain if any value is non-finite.
void check_params(const NetworkSpec& spec, const NetworkParams& params);

double sigmoid(double s) noexcept;

inline constexpr double kProbabilityClamp = 1.0e-12;

/// Binary cross-entropy of probability p for target y in {0, 1}.
double cross_entropy(double p, int y);

/// C-class cross-entropy; `target` must be one-hot.
double cross_entropy(const Eigen::VectorXd& predicted, const Eigen::VectorXd& target);

/// Elementwise maximum over the pieces' affine responses, lowest piece on ties.
Eigen::VectorXd maxout_forward(const Eigen::VectorXd& x, const std::vector<Eigen::MatrixXd>& weights,
                               const std::vector<Eigen::VectorXd>& biases, Eigen::VectorXi* winners = nullptr);

/// Activations of a batch (columns are samples), enough for exact backprop.
struct Trace {
    std::vector<Eigen::MatrixXd> activations; // [0] is the input, back() the output
    std::vector<Eigen::MatrixXi> winners;     // maxout argmax piece per layer (empty otherwise)
};

Trace forward_batch(const NetworkSpec& spec, const NetworkParams& params, const Eigen::MatrixXd& inputs);

struct ForwardResult {
    Eigen::VectorXd output;
    Trace trace;
};

ForwardResult forward(const NetworkSpec& spec, const NetworkParams& params, const Eigen::VectorXd& x);

/// Column targets for class indices: one row (0/1) for the sigmoid head,
/// one-hot columns for softmax.
Eigen::MatrixXd make_targets(const NetworkSpec& spec, const std::vector<int>& labels);

/// Mean cross-entropy over the batch plus l1*sum|w| + (l2/2)*sum w^2 (weights only).
double batch_loss(const NetworkSpec& spec, const NetworkParams& params, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, bool with_regularization = true);

/// Exact gradient of batch_loss given a trace of the same params.
ParamSet backward(const NetworkSpec& spec, const NetworkParams& params, const Trace& trace,
                  const Eigen::MatrixXd& targets);

/// Applies one update in place. Throws training_diverged on non-finite gradients.
void optimizer_step(NetworkParams& params, const ParamSet& gradients, const OptimizerConfig& config);

struct EpochLoss {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    std::optional<double> validation_loss;
};

struct TrainResult {
    NetworkParams params;
    std::vector<EpochLoss> history;
};

/// Rows of the matrices are samples; labels are class indices.
struct LabeledData {
    Eigen::MatrixXd features;
    std::vector<int> labels;
};

TrainResult train(const NetworkSpec& spec, const LabeledData& train_set, const LabeledData& validation_set);

struct Prediction {
    Eigen::VectorXd score;
    int label = 0;
};

/// Binary head: label 1 iff score >= 0.5. Softmax: argmax, lowest index on ties.
Prediction predict(const NetworkSpec& spec, const NetworkParams& params, const Eigen::VectorXd& x);

std::vector<Prediction> predict_batch(const NetworkSpec& spec, const NetworkParams& params,
                                      const Eigen::MatrixXd& features);

} // namespace fcmdnn
