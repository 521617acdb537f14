#include "methods.hpp"

#include <cstdio>
#include <sstream>

#include "anoscope/explain.hpp"
#include "anoscope/recon.hpp"

namespace anoscope::cli {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> number_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (*end != '\0') throw Error(ErrorCode::ConfigError, "--" + key + " expects numbers, got '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::uint64_t seed_of(const RunConfig& cfg) { return static_cast<std::uint64_t>(cfg.integer("seed", 0)); }

namespace {

KernelSpec kernel_from(const RunConfig& cfg, Index dim, double default_gamma) {
    const std::string kind = cfg.get("kernel", "rbf");
    const double gamma = cfg.number("gamma", default_gamma);
    if (kind == "linear") return KernelSpec::linear();
    if (kind == "rbf") return KernelSpec::rbf(gamma);
    if (kind == "mahalanobis") {
        const auto diag = number_list("metric-diag", cfg.require("metric-diag"));
        if (static_cast<Index>(diag.size()) != dim) {
            throw Error(ErrorCode::ConfigError, "--metric-diag needs one value per feature");
        }
        Matrix m = Matrix::Zero(dim, dim);
        for (Index i = 0; i < dim; ++i) m(i, i) = diag[static_cast<std::size_t>(i)];
        return explain::mahalanobis_kernel(m, gamma);
    }
    throw Error(ErrorCode::ConfigError, "--kernel expects linear, rbf or mahalanobis");
}

deep::MLPSpec network_from(const RunConfig& cfg, Index dim, bool bias) {
    deep::MLPSpec spec;
    spec.layer_dims.push_back(dim);
    for (double h : number_list("hidden", cfg.get("hidden", "32,32"))) spec.layer_dims.push_back(static_cast<Index>(h));
    spec.layer_dims.push_back(cfg.integer("bottleneck", bias ? 1 : 8));
    const std::string act = cfg.get("activation", "elu");
    spec.activation = deep::activation_from_string(act);
    spec.use_bias = bias;
    spec.seed = seed_of(cfg);
    return spec;
}

}  // namespace

const std::vector<OptionSpec>& fit_options() {
    static const std::vector<OptionSpec> options{
        {"method", "gaussian|gmm|kde|ppca|mve|svdd|ocsvm|pca|kpca|vq|ae|dsvdd|soft-dsvdd|deep-sad"},
        {"in", "training CSV"},
        {"out", "checkpoint path"},
        {"labels-col", "none, last or zero-based label column"},
        {"encoding", "label encoding: signed (+1/-1) or flag (0/1)"},
        {"kernel", "linear, rbf or mahalanobis"},
        {"gamma", "kernel scale, or auto (kde, kpca)"},
        {"metric-diag", "diagonal of the Mahalanobis matrix, comma separated"},
        {"nu", "nu for svdd/ocsvm/soft-dsvdd"},
        {"k", "components (gmm) or prototypes (vq)"},
        {"d", "subspace dimension (pca, ppca)"},
        {"variance-fraction", "retained variance (pca, kpca)"},
        {"support-fraction", "MCD support fraction (mve)"},
        {"contamination", "boundary quantile (mve)"},
        {"norm", "l2 or l1 (vq)"},
        {"bottleneck", "code size (ae) or embedding size (deep svdd)"},
        {"hidden", "hidden layer widths, comma separated"},
        {"activation", "elu, relu or linear"},
        {"epochs", "training epochs"},
        {"batch-size", "minibatch size"},
        {"lr", "learning rate"},
        {"weight-decay", "L2 weight decay (deep svdd)"},
        {"eta", "labeled-term weight (deep-sad)"},
        {"seed", "random seed"}
    };
    return options;
}

ModelingDimensions dimensions_for(const RunConfig& cfg, const Dataset& train) {
    const std::string method = cfg.require("method");
    const Index dim = train.dim();
    ModelingDimensions d;
    auto& reg = d.regularization;
    reg.seed = seed_of(cfg);
    reg.components = cfg.integer("k", 2);
    reg.subspace_dim = cfg.integer("d", 0);
    reg.variance_fraction = cfg.number("variance-fraction", 0.9);
    reg.support_fraction = cfg.number("support-fraction", 0.9);
    reg.contamination = cfg.number("contamination", 0.01);
    reg.optimizer.epochs = static_cast<int>(cfg.integer("epochs", 150));
    reg.optimizer.batch_size = cfg.integer("batch-size", 64);
    reg.optimizer.seed = reg.seed;
    d.loss.nu = cfg.number("nu", 0.1);
    const double default_gamma = 1.0 / static_cast<double>(dim);

    if (method == "gaussian") {
        d.family = ModelFamily::Gaussian;
    } else if (method == "gmm") {
        d.family = ModelFamily::GaussianMixture;
    } else if (method == "kde") {
        d.family = ModelFamily::KernelDensity;
        reg.select_bandwidth = cfg.get("gamma", "auto") == "auto";
        RunConfig fixed = cfg;
        if (reg.select_bandwidth) fixed.set("gamma", "1");
        d.feature_map = FeatureMap::with_kernel(kernel_from(fixed, dim, 1.0));
    } else if (method == "ppca") {
        d.family = ModelFamily::ProbabilisticPCA;
        if (reg.subspace_dim == 0) reg.subspace_dim = 1;
    } else if (method == "mve") {
        d.loss.kind = LossKind::Hinge;
        d.family = ModelFamily::Ellipsoid;
    } else if (method == "svdd" || method == "ocsvm") {
        d.loss.kind = LossKind::ShiftedHinge;
        d.family = method == "svdd" ? ModelFamily::Hypersphere : ModelFamily::Hyperplane;
        d.feature_map = FeatureMap::with_kernel(kernel_from(cfg, dim, default_gamma));
    } else if (method == "pca") {
        d.loss.kind = LossKind::SquaredError;
        d.family = ModelFamily::Subspace;
    } else if (method == "kpca") {
        d.loss.kind = LossKind::SquaredError;
        d.family = ModelFamily::Subspace;
        RunConfig c = cfg;
        if (cfg.get("gamma", "auto") == "auto") {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", recon::kpca_gamma_heuristic(train));
            c.set("gamma", buf);
        }
        d.feature_map = FeatureMap::with_kernel(kernel_from(c, dim, default_gamma));
    } else if (method == "vq") {
        d.loss.kind = LossKind::SquaredError;
        d.family = ModelFamily::Prototypes;
        reg.components = cfg.integer("k", 10);
        const std::string norm = cfg.get("norm", "l2");
        reg.vq_norm = norm == "l1" ? recon::VQNorm::L1 : recon::VQNorm::L2;
    } else if (method == "ae") {
        d.loss.kind = LossKind::SquaredError;
        d.family = ModelFamily::Autoencoder;
        d.feature_map = FeatureMap::neural(network_from(cfg, dim, true));
        reg.optimizer.learning_rate = cfg.number("lr", 3e-3);
    } else if (method == "dsvdd" || method == "soft-dsvdd" || method == "deep-sad") {
        d.loss.kind = method == "dsvdd"        ? LossKind::LinearOneClass
                      : method == "soft-dsvdd" ? LossKind::Hinge
                                               : LossKind::SemiSupExponent;
        d.family = ModelFamily::Hypersphere;
        d.feature_map = FeatureMap::neural(network_from(cfg, dim, false));
        reg.optimizer.learning_rate = cfg.number("lr", 1e-3);
        reg.optimizer.weight_decay = cfg.number("weight-decay", 1e-5);
        reg.eta = cfg.number("eta", 1.0);
    } else {
        throw Error(ErrorCode::ConfigError, "unknown --method '" + method + "'");
    }
    return d;
}

}  // namespace anoscope::cli
