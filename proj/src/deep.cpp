#include "anoscope/deep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "anoscope/stats.hpp"

namespace anoscope::deep {

const char* to_string(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::ReLU: return "relu";
        case Activation::ELU: return "elu";
    }
    return "?";
}

Activation activation_from_string(const std::string& s) {
    if (s == "linear") return Activation::Linear;
    if (s == "relu") return Activation::ReLU;
    if (s == "elu") return Activation::ELU;
    throw Error(ErrorCode::InvalidArgument, "unknown activation '" + s + "'");
}

const char* to_string(DeepSVDDVariant v) {
    switch (v) {
        case DeepSVDDVariant::OneClass: return "one-class";
        case DeepSVDDVariant::SoftBoundary: return "soft-boundary";
        case DeepSVDDVariant::SAD: return "sad";
    }
    return "?";
}

Matrix activate(Activation a, const Matrix& z) {
    switch (a) {
        case Activation::Linear: return z;
        case Activation::ReLU: return z.cwiseMax(0.0);
        case Activation::ELU:
            return z.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
    }
    return z;
}

Matrix activate_derivative(Activation a, const Matrix& z) {
    switch (a) {
        case Activation::Linear: return Matrix::Ones(z.rows(), z.cols());
        case Activation::ReLU: return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
        case Activation::ELU: return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
    }
    return z;
}

double Gradients::squared_norm() const {
    double s = 0.0;
    for (const auto& w : weight) s += w.squaredNorm();
    for (const auto& b : bias) s += b.squaredNorm();
    return s;
}

// ---- MLP -------------------------------------------------------------------------

MLP::MLP(const MLPSpec& spec) {
    if (spec.layer_dims.size() < 2) throw Error(ErrorCode::InvalidArgument, "an MLP needs at least one layer");
    for (Index d : spec.layer_dims) {
        if (d < 1) throw Error(ErrorCode::InvalidArgument, "layer dimensions must be positive");
    }
    std::mt19937_64 rng(spec.seed);
    const std::size_t n_layers = spec.layer_dims.size() - 1;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Index in = spec.layer_dims[l];
        const Index out = spec.layer_dims[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> u(-limit, limit);
        Layer layer;
        layer.weight.resize(out, in);
        for (Index r = 0; r < out; ++r) {
            for (Index c = 0; c < in; ++c) layer.weight(r, c) = u(rng);
        }
        if (spec.use_bias) layer.bias = Vector::Zero(out);
        layer.activation = l + 1 == n_layers ? Activation::Linear : spec.activation;
        layers_.push_back(std::move(layer));
    }
}

MLP::MLP(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw Error(ErrorCode::InvalidArgument, "an MLP needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.has_bias() && layer.bias.size() != layer.out_dim()) {
            throw Error(ErrorCode::DimensionMismatch, "bias size differs from layer output");
        }
        if (l > 0 && layers_[l - 1].out_dim() != layer.in_dim()) {
            throw Error(ErrorCode::DimensionMismatch, "consecutive layer dimensions differ");
        }
    }
}

Index MLP::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
Index MLP::output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

bool MLP::has_bias() const {
    return std::any_of(layers_.begin(), layers_.end(), [](const Layer& l) { return l.has_bias(); });
}

Index MLP::parameter_count() const {
    Index n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

Vector MLP::flatten() const {
    Vector p(parameter_count());
    Index k = 0;
    for (const auto& l : layers_) {
        for (Index c = 0; c < l.weight.cols(); ++c) {
            for (Index r = 0; r < l.weight.rows(); ++r) p(k++) = l.weight(r, c);
        }
        for (Index i = 0; i < l.bias.size(); ++i) p(k++) = l.bias(i);
    }
    return p;
}

void MLP::unflatten(const Vector& params) {
    if (params.size() != parameter_count()) throw Error(ErrorCode::DimensionMismatch, "parameter count differs");
    Index k = 0;
    for (auto& l : layers_) {
        for (Index c = 0; c < l.weight.cols(); ++c) {
            for (Index r = 0; r < l.weight.rows(); ++r) l.weight(r, c) = params(k++);
        }
        for (Index i = 0; i < l.bias.size(); ++i) l.bias(i) = params(k++);
    }
}

Matrix MLP::forward(const Matrix& x, Tape* tape) const {
    if (x.cols() != input_dim()) throw Error(ErrorCode::DimensionMismatch, "input dimension differs from the first layer");
    if (tape) {
        tape->inputs.clear();
        tape->pre_activations.clear();
    }
    Matrix h = x;
    for (const auto& layer : layers_) {
        Matrix z = h * layer.weight.transpose();
        if (layer.has_bias()) z.rowwise() += layer.bias.transpose();
        if (tape) {
            tape->inputs.push_back(h);
            tape->pre_activations.push_back(z);
        }
        h = activate(layer.activation, z);
    }
    return h;
}

RowVector MLP::forward_one(PointView x) const {
    Matrix m = x;
    return forward(m).row(0);
}

Gradients MLP::backward(const Tape& tape, const Matrix& output_grad) const {
    if (tape.inputs.size() != layers_.size()) throw Error(ErrorCode::InvalidArgument, "tape does not match network");
    Gradients g;
    g.weight.resize(layers_.size());
    g.bias.resize(layers_.size());
    Matrix delta = output_grad;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const auto& layer = layers_[i];
        if (delta.cols() != layer.out_dim() || delta.rows() != tape.inputs[i].rows()) {
            throw Error(ErrorCode::DimensionMismatch, "output gradient shape differs from layer output");
        }
        delta = delta.cwiseProduct(activate_derivative(layer.activation, tape.pre_activations[i]));
        g.weight[i] = delta.transpose() * tape.inputs[i];
        if (layer.has_bias()) g.bias[i] = delta.colwise().sum().transpose();
        delta = delta * layer.weight;
    }
    g.input = std::move(delta);
    return g;
}

// ---- Optimizer -------------------------------------------------------------------

Optimizer::Optimizer(const OptimizerSpec& spec, const MLP& net) : spec_(spec) {
    if (!(spec.learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
    if (spec.batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch size must be at least 1");
    for (const auto& l : net.layers()) {
        m_w_.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
        v_w_.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
        m_b_.push_back(Vector::Zero(l.bias.size()));
        v_b_.push_back(Vector::Zero(l.bias.size()));
    }
}

void Optimizer::step(MLP& net, const Gradients& grads) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++t_;
    const double lr = spec_.learning_rate;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    auto& layers = net.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        Matrix gw = grads.weight[i];
        if (spec_.weight_decay > 0.0) gw += spec_.weight_decay * layers[i].weight;
        if (spec_.kind == OptimizerKind::SGD) {
            layers[i].weight -= lr * gw;
            if (layers[i].has_bias()) layers[i].bias -= lr * grads.bias[i];
            continue;
        }
        m_w_[i] = beta1 * m_w_[i] + (1.0 - beta1) * gw;
        v_w_[i] = beta2 * v_w_[i] + (1.0 - beta2) * gw.cwiseAbs2();
        layers[i].weight.array() -= lr * (m_w_[i].array() / c1) / ((v_w_[i].array() / c2).sqrt() + eps);
        if (layers[i].has_bias()) {
            const Vector& gb = grads.bias[i];
            m_b_[i] = beta1 * m_b_[i] + (1.0 - beta1) * gb;
            v_b_[i] = beta2 * v_b_[i] + (1.0 - beta2) * gb.cwiseAbs2();
            layers[i].bias.array() -= lr * (m_b_[i].array() / c1) / ((v_b_[i].array() / c2).sqrt() + eps);
        }
    }
}

namespace {

std::vector<Index> shuffled(Index n, std::mt19937_64& rng) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

Matrix gather(const Matrix& x, const std::vector<Index>& order, std::size_t begin, std::size_t end) {
    Matrix b(static_cast<Index>(end - begin), x.cols());
    for (std::size_t i = begin; i < end; ++i) b.row(static_cast<Index>(i - begin)) = x.row(order[i]);
    return b;
}

void check_finite(double loss, const char* what) {
    if (!std::isfinite(loss)) throw Error(ErrorCode::Diverged, std::string(what) + " loss is not finite");
}

}  // namespace

// ---- Autoencoder -----------------------------------------------------------------

Matrix AEModel::reconstruct(const Matrix& x) const { return decoder.forward(encoder.forward(x)); }

double AEModel::score(PointView x) const {
    Matrix m = x;
    return (m - reconstruct(m)).squaredNorm();
}

Vector AEModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

namespace {

double reconstruction_loss(const AEModel& m, const Matrix& x) {
    return (x - m.reconstruct(x)).rowwise().squaredNorm().mean();
}

}  // namespace

AEModel fit_autoencoder(const Dataset& train, const MLPSpec& topology, const OptimizerSpec& opt,
                        const Dataset& holdout) {
    if (train.size() == 0) throw Error(ErrorCode::EmptyTrainingSet, "autoencoder needs training data");
    const auto& dims = topology.layer_dims;
    if (dims.size() < 2) throw Error(ErrorCode::InvalidArgument, "encoder needs at least one layer");
    if (dims.front() != train.dim()) throw Error(ErrorCode::DimensionMismatch, "encoder input differs from data dimension");
    if (dims.back() > dims.front()) throw Error(ErrorCode::InvalidArgument, "bottleneck must not exceed input dimension");

    MLPSpec dec = topology;
    dec.layer_dims.assign(dims.rbegin(), dims.rend());
    dec.seed = topology.seed + 1;

    AEModel model;
    model.encoder = MLP(topology);
    model.decoder = MLP(dec);
    model.bottleneck = dims.back();

    Optimizer opt_e(opt, model.encoder);
    Optimizer opt_d(opt, model.decoder);
    std::mt19937_64 rng(opt.seed);
    const Matrix& x = train.rows;
    const bool use_holdout = holdout.size() > 0;

    AEModel best = model;
    double best_loss = use_holdout ? reconstruction_loss(model, holdout.rows) : reconstruction_loss(model, x);
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        const auto order = shuffled(x.rows(), rng);
        for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(opt.batch_size)) {
            const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(opt.batch_size));
            const Matrix batch = gather(x, order, b, e);
            MLP::Tape te;
            MLP::Tape td;
            const Matrix z = model.encoder.forward(batch, &te);
            const Matrix out = model.decoder.forward(z, &td);
            const Matrix grad = 2.0 * (out - batch) / static_cast<double>(batch.rows());
            const Gradients gd = model.decoder.backward(td, grad);
            const Gradients ge = model.encoder.backward(te, gd.input);
            opt_d.step(model.decoder, gd);
            opt_e.step(model.encoder, ge);
        }
        const double train_loss = reconstruction_loss(model, x);
        check_finite(train_loss, "autoencoder");
        model.train_loss.push_back(train_loss);
        const double monitored = use_holdout ? reconstruction_loss(model, holdout.rows) : train_loss;
        if (use_holdout) model.holdout_loss.push_back(monitored);
        if (monitored < best_loss) {
            best_loss = monitored;
            best.encoder = model.encoder;
            best.decoder = model.decoder;
            best.best_epoch = epoch;
        }
    }
    best.train_loss = std::move(model.train_loss);
    best.holdout_loss = std::move(model.holdout_loss);
    return best;
}

// ---- Deep SVDD -------------------------------------------------------------------

RowVector DeepSVDDModel::embed(PointView x) const { return network.forward_one(x); }

double DeepSVDDModel::score(PointView x) const {
    const double d = (embed(x) - center).squaredNorm();
    return variant == DeepSVDDVariant::SoftBoundary ? d - radius2 : d;
}

Vector DeepSVDDModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

namespace {

double variance_of(const Matrix& z) {
    if (z.rows() == 0) return 0.0;
    const RowVector mu = z.colwise().mean();
    return (z.rowwise() - mu).colwise().squaredNorm().mean() / static_cast<double>(z.rows());
}

}  // namespace

double embedding_variance(const MLP& net, const Matrix& data) {
    if (data.rows() == 0) return 0.0;
    return variance_of(net.forward(data));
}

double embedding_variance(const DeepSVDDModel& model, const Dataset& data) {
    return embedding_variance(model.network, data.rows);
}

namespace {

std::vector<double> squared_distances(const Matrix& z, const RowVector& c) {
    const Vector d = (z.rowwise() - c).rowwise().squaredNorm();
    return {d.data(), d.data() + d.size()};
}

}  // namespace

DeepSVDDModel fit_deep_svdd(const Dataset& train, const MLPSpec& spec, const OptimizerSpec& opt,
                            const DeepSVDDOptions& options, const Dataset& labeled, const EpochCallback& on_epoch) {
    if (spec.use_bias) throw Error(ErrorCode::BiasTermsForbidden, "Deep SVDD networks must not have bias terms");
    return fit_deep_svdd(train, MLP(spec), opt, options, labeled, on_epoch);
}

DeepSVDDModel fit_deep_svdd(const Dataset& train, MLP initial, const OptimizerSpec& opt,
                            const DeepSVDDOptions& options, const Dataset& labeled, const EpochCallback& on_epoch) {
    if (initial.has_bias()) throw Error(ErrorCode::BiasTermsForbidden, "Deep SVDD networks must not have bias terms");
    if (train.size() == 0) throw Error(ErrorCode::EmptyTrainingSet, "Deep SVDD needs training data");
    if (initial.input_dim() != train.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "network input differs from data dimension");
    }
    if (options.variant == DeepSVDDVariant::SoftBoundary && !(options.nu > 0.0 && options.nu <= 1.0)) {
        throw Error(ErrorCode::InvalidNu, "nu must be in (0, 1]");
    }
    const Dataset known = labeled.size() > 0 ? labeled.labeled_only() : Dataset{};
    if (options.variant == DeepSVDDVariant::SAD && known.size() == 0) {
        throw Error(ErrorCode::InvalidArgument, "the SAD variant needs labeled points");
    }

    DeepSVDDModel model;
    model.network = std::move(initial);
    model.variant = options.variant;
    model.nu = options.nu;
    model.eta = options.eta;

    // Unlabeled rows first, then labeled rows with their sign.
    Matrix x = train.rows;
    std::vector<int> sign(static_cast<std::size_t>(train.size()), 0);
    if (options.variant == DeepSVDDVariant::SAD) {
        x.conservativeResize(train.size() + known.size(), Eigen::NoChange);
        x.bottomRows(known.size()) = known.rows;
        for (Label l : known.labels) sign.push_back(label_sign(l));
    }
    const Index n_unlabeled = train.size();

    const Matrix z0 = model.network.forward(train.rows);
    model.center = z0.colwise().mean();
    if (model.center.squaredNorm() == 0.0) {
        throw Error(ErrorCode::CollapseDetected, "initial embeddings average to the zero vector");
    }
    const double v0 = variance_of(z0);
    model.variance_trace.push_back(v0);
    if (options.variant == DeepSVDDVariant::SoftBoundary) {
        model.radius2 = stats::quantile(squared_distances(z0, model.center), 1.0 - options.nu);
    }

    Optimizer optimizer(opt, model.network);
    std::mt19937_64 rng(opt.seed);
    const double eta = options.eta;
    const double nu = options.nu;

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        const auto order = shuffled(x.rows(), rng);
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(opt.batch_size)) {
            const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(opt.batch_size));
            const Matrix batch = gather(x, order, b, e);
            const auto bn = static_cast<double>(batch.rows());
            MLP::Tape tape;
            const Matrix z = model.network.forward(batch, &tape);
            const Matrix diff = z.rowwise() - model.center;
            const Vector d = diff.rowwise().squaredNorm();
            // dloss/dd per row, then chain through d = ||z - c||^2.
            Vector w(batch.rows());
            double loss = 0.0;
            for (Index i = 0; i < batch.rows(); ++i) {
                const int y = sign[static_cast<std::size_t>(order[b + static_cast<std::size_t>(i)])];
                switch (options.variant) {
                    case DeepSVDDVariant::OneClass:
                        loss += d(i) / bn;
                        w(i) = 1.0 / bn;
                        break;
                    case DeepSVDDVariant::SoftBoundary: {
                        const double excess = d(i) - model.radius2;
                        loss += std::max(0.0, excess) / (nu * bn);
                        w(i) = excess > 0.0 ? 1.0 / (nu * bn) : 0.0;
                        break;
                    }
                    case DeepSVDDVariant::SAD:
                        if (y == 0) {
                            loss += d(i) / bn;
                            w(i) = 1.0 / bn;
                        } else if (y > 0) {
                            loss += eta * d(i) / bn;
                            w(i) = eta / bn;
                        } else if (d(i) > options.min_distance) {
                            loss += eta / (d(i) * bn);
                            w(i) = -eta / (d(i) * d(i) * bn);
                        } else {
                            loss += eta / (options.min_distance * bn);
                            w(i) = 0.0;
                        }
                        break;
                }
            }
            if (options.variant == DeepSVDDVariant::SoftBoundary) loss += model.radius2 * bn / static_cast<double>(x.rows());
            epoch_loss += loss * bn / static_cast<double>(x.rows());
            const Matrix grad = 2.0 * (diff.array().colwise() * w.array()).matrix();
            optimizer.step(model.network, model.network.backward(tape, grad));
        }
        check_finite(epoch_loss, "Deep SVDD");
        model.loss_trace.push_back(epoch_loss);

        const Matrix zu = model.network.forward(x.topRows(n_unlabeled));
        const double v = variance_of(zu);
        model.variance_trace.push_back(v);
        if (v < options.collapse_ratio * v0) {
            throw Error(ErrorCode::CollapseDetected,
                        "embedding variance fell to " + std::to_string(v) + " from " + std::to_string(v0) +
                            " at epoch " + std::to_string(epoch));
        }
        if (options.variant == DeepSVDDVariant::SoftBoundary) {
            model.radius2 = stats::quantile(squared_distances(zu, model.center), 1.0 - nu);
        }
        if (on_epoch) on_epoch(epoch, model);
    }
    return model;
}

}  // namespace anoscope::deep
