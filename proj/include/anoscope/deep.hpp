#pragma once

// Small fully-connected networks with hand-written backpropagation, and the
// two neural detectors built on them: the autoencoder and Deep SVDD.

#include <cstdint>
#include <functional>
#include <vector>

#include "anoscope/types.hpp"

namespace anoscope::deep {

enum class Activation { Linear, ReLU, ELU };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Row-wise activation and its derivative w.r.t. the pre-activation (ELU alpha = 1).
Matrix activate(Activation a, const Matrix& z);
Matrix activate_derivative(Activation a, const Matrix& z);

struct Layer {
    Matrix weight;  // out x in
    Vector bias;    // empty when the layer has no bias
    Activation activation = Activation::Linear;

    bool has_bias() const { return bias.size() > 0; }
    Index in_dim() const { return weight.cols(); }
    Index out_dim() const { return weight.rows(); }
};

/// layer_dims = {in, hidden..., out}; hidden layers use `activation`, the
/// output layer is linear.
struct MLPSpec {
    std::vector<Index> layer_dims;
    Activation activation = Activation::ELU;
    bool use_bias = true;
    std::uint64_t seed = 0;
};

struct Gradients {
    std::vector<Matrix> weight;
    std::vector<Vector> bias;
    Matrix input;  // d loss / d x

    double squared_norm() const;
};

class MLP {
public:
    /// Per-layer inputs and pre-activations from a forward pass.
    struct Tape {
        std::vector<Matrix> inputs;
        std::vector<Matrix> pre_activations;
    };

    MLP() = default;
    /// Glorot-uniform weights, zero biases.
    explicit MLP(const MLPSpec& spec);
    explicit MLP(std::vector<Layer> layers);

    /// x is batch x in_dim (one sample per row).
    Matrix forward(const Matrix& x, Tape* tape = nullptr) const;
    RowVector forward_one(PointView x) const;
    Gradients backward(const Tape& tape, const Matrix& output_grad) const;

    Index input_dim() const;
    Index output_dim() const;
    bool has_bias() const;
    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }
    Index parameter_count() const;

    /// All weights then biases, layer by layer.
    Vector flatten() const;
    void unflatten(const Vector& params);

private:
    std::vector<Layer> layers_;
};

enum class OptimizerKind { SGD, AdaptiveMoments };

struct OptimizerSpec {
    OptimizerKind kind = OptimizerKind::AdaptiveMoments;
    double learning_rate = 1e-3;
    Index batch_size = 64;
    int epochs = 100;
    double weight_decay = 0.0;  // L2 on weights, not biases
    std::uint64_t seed = 0;      // minibatch order
};

/// SGD or Adam (beta1 = 0.9, beta2 = 0.999, eps = 1e-8).
class Optimizer {
public:
    Optimizer(const OptimizerSpec& spec, const MLP& net);
    void step(MLP& net, const Gradients& grads);

private:
    OptimizerSpec spec_;
    long t_ = 0;
    std::vector<Matrix> m_w_, v_w_;
    std::vector<Vector> m_b_, v_b_;
};

// ---- Autoencoder --------------------------------------------------------------

struct AEModel {
    MLP encoder;
    MLP decoder;
    Index bottleneck = 0;
    std::vector<double> train_loss;
    std::vector<double> holdout_loss;
    int best_epoch = -1;

    Matrix reconstruct(const Matrix& x) const;
    /// ||x - decoder(encoder(x))||^2
    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
};

/**
 * `topology.layer_dims` is the encoder {D, hidden..., d}; the decoder mirrors
 * it. Trains on mean squared reconstruction error and keeps the parameters
 * of the epoch with the lowest hold-out error.
 */
AEModel fit_autoencoder(const Dataset& train, const MLPSpec& topology, const OptimizerSpec& opt,
                        const Dataset& holdout);

// ---- Deep SVDD ------------------------------------------------------------------

enum class DeepSVDDVariant { OneClass, SoftBoundary, SAD };

const char* to_string(DeepSVDDVariant v);

struct DeepSVDDOptions {
    DeepSVDDVariant variant = DeepSVDDVariant::OneClass;
    double nu = 0.1;                   // SoftBoundary
    double eta = 1.0;                  // SAD weight of labeled terms
    double collapse_ratio = 1e-6;      // abort when variance < ratio * initial variance
    double min_distance = 1e-6;        // floor for the inverse-distance term
};

struct DeepSVDDModel {
    MLP network;
    RowVector center;
    DeepSVDDVariant variant = DeepSVDDVariant::OneClass;
    double radius2 = 0.0;
    double nu = 0.1;
    double eta = 1.0;
    std::vector<double> loss_trace;
    std::vector<double> variance_trace;  // embedding variance, initial then per epoch

    RowVector embed(PointView x) const;
    /// ||phi(x) - c||^2, minus R^2 for the soft-boundary variant.
    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
};

using EpochCallback = std::function<void(int epoch, const DeepSVDDModel& model)>;

/**
 * Trains a bias-free network so that normal data maps close to a fixed center
 * (the mean initial embedding). `labeled` supplies the labeled rows for SAD.
 * Throws BiasTermsForbidden, and CollapseDetected when the embedding variance
 * falls below `collapse_ratio` of its initial value.
 */
DeepSVDDModel fit_deep_svdd(const Dataset& train, const MLPSpec& spec, const OptimizerSpec& opt,
                            const DeepSVDDOptions& options, const Dataset& labeled = {},
                            const EpochCallback& on_epoch = {});
/// Same, starting from the weights of `initial`.
DeepSVDDModel fit_deep_svdd(const Dataset& train, MLP initial, const OptimizerSpec& opt, const DeepSVDDOptions& options,
                            const Dataset& labeled = {}, const EpochCallback& on_epoch = {});

/// Mean per-dimension variance of net(x) over the rows of `data`.
double embedding_variance(const MLP& net, const Matrix& data);
double embedding_variance(const DeepSVDDModel& model, const Dataset& data);

}  // namespace anoscope::deep
