#include "anoscope/detector.hpp"

#include <numeric>
#include <random>

#include "anoscope/stats.hpp"

namespace anoscope {

const char* to_string(LossKind k) {
    switch (k) {
        case LossKind::NegLogLikelihood: return "negative-log-likelihood";
        case LossKind::Hinge: return "hinge";
        case LossKind::ShiftedHinge: return "shifted-hinge";
        case LossKind::LinearOneClass: return "linear-one-class";
        case LossKind::SemiSupExponent: return "semi-supervised-exponent";
        case LossKind::SquaredError: return "squared-error";
    }
    return "?";
}

const char* to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::Gaussian: return "gaussian";
        case ModelFamily::GaussianMixture: return "gaussian-mixture";
        case ModelFamily::KernelDensity: return "kernel-density";
        case ModelFamily::ProbabilisticPCA: return "probabilistic-pca";
        case ModelFamily::Ellipsoid: return "ellipsoid";
        case ModelFamily::Hypersphere: return "hypersphere";
        case ModelFamily::Hyperplane: return "hyperplane";
        case ModelFamily::Subspace: return "subspace";
        case ModelFamily::Autoencoder: return "autoencoder";
        case ModelFamily::Prototypes: return "prototypes";
    }
    return "?";
}

const char* to_string(FeatureMapKind k) {
    switch (k) {
        case FeatureMapKind::RawInput: return "raw";
        case FeatureMapKind::Kernel: return "kernel";
        case FeatureMapKind::Neural: return "neural";
    }
    return "?";
}

double DetectorModel::score(PointView x) const {
    return std::visit([&](const auto& m) { return m.score(x); }, model);
}

Vector DetectorModel::score_batch(const Matrix& x) const {
    return std::visit([&](const auto& m) -> Vector { return m.score_batch(x); }, model);
}

std::string DetectorModel::method() const {
    static constexpr const char* names[] = {"gaussian", "gmm", "kde",   "ppca", "mve", "svdd", "ocsvm",
                                            "ssvdd",    "pca", "kpca",  "vq",   "ae",  "dsvdd"};
    return names[model.index()];
}

bool DetectorModel::has_intrinsic_boundary() const {
    return std::holds_alternative<oneclass::MVEModel>(model) || std::holds_alternative<oneclass::SVDDModel>(model) ||
           std::holds_alternative<oneclass::OCSVMModel>(model) ||
           std::holds_alternative<oneclass::SemiSupervisedSVDDModel>(model) ||
           (std::holds_alternative<deep::DeepSVDDModel>(model) &&
            std::get<deep::DeepSVDDModel>(model).variant == deep::DeepSVDDVariant::SoftBoundary);
}

namespace {

struct Row {
    ModelFamily family;
    LossKind loss;
    FeatureMapKind map;
};

// Supported (family, loss, feature map) rows.
constexpr Row kTable[] = {
    {ModelFamily::Gaussian, LossKind::NegLogLikelihood, FeatureMapKind::RawInput},
    {ModelFamily::GaussianMixture, LossKind::NegLogLikelihood, FeatureMapKind::RawInput},
    {ModelFamily::KernelDensity, LossKind::NegLogLikelihood, FeatureMapKind::Kernel},
    {ModelFamily::ProbabilisticPCA, LossKind::NegLogLikelihood, FeatureMapKind::RawInput},
    {ModelFamily::Ellipsoid, LossKind::Hinge, FeatureMapKind::RawInput},
    {ModelFamily::Hypersphere, LossKind::ShiftedHinge, FeatureMapKind::RawInput},
    {ModelFamily::Hypersphere, LossKind::ShiftedHinge, FeatureMapKind::Kernel},
    {ModelFamily::Hypersphere, LossKind::Hinge, FeatureMapKind::Neural},
    {ModelFamily::Hypersphere, LossKind::LinearOneClass, FeatureMapKind::Neural},
    {ModelFamily::Hypersphere, LossKind::SemiSupExponent, FeatureMapKind::Neural},
    {ModelFamily::Hyperplane, LossKind::ShiftedHinge, FeatureMapKind::RawInput},
    {ModelFamily::Hyperplane, LossKind::ShiftedHinge, FeatureMapKind::Kernel},
    {ModelFamily::Subspace, LossKind::SquaredError, FeatureMapKind::RawInput},
    {ModelFamily::Subspace, LossKind::SquaredError, FeatureMapKind::Kernel},
    {ModelFamily::Autoencoder, LossKind::SquaredError, FeatureMapKind::Neural},
    {ModelFamily::Prototypes, LossKind::SquaredError, FeatureMapKind::RawInput},
};

void check_supported(const ModelingDimensions& d) {
    bool loss_ok = false;
    for (const auto& r : kTable) {
        if (r.family != d.family || r.loss != d.loss.kind) continue;
        loss_ok = true;
        if (r.map == d.feature_map.kind) return;
    }
    if (!loss_ok) {
        throw Error(ErrorCode::UnsupportedCombination, std::string("loss: ") + to_string(d.loss.kind) +
                                                           " is not supported for model family " +
                                                           to_string(d.family));
    }
    throw Error(ErrorCode::UnsupportedCombination, std::string("feature_map: ") + to_string(d.feature_map.kind) +
                                                       " is not supported for " + to_string(d.family) + " with " +
                                                       to_string(d.loss.kind) + " loss");
}

KernelSpec kernel_or_linear(const FeatureMap& f) {
    return f.kind == FeatureMapKind::Kernel ? f.kernel : KernelSpec::linear();
}

// Seeded split of row indices into (fit, holdout).
std::pair<Dataset, Dataset> holdout_split(const Dataset& data, double fraction, std::uint64_t seed) {
    const auto n = data.size();
    auto h = static_cast<Index>(std::floor(fraction * static_cast<double>(n)));
    if (n >= 2) h = std::clamp<Index>(h, 1, n - 1);
    else h = 0;
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<Index> hold(idx.begin(), idx.begin() + h);
    std::vector<Index> fit(idx.begin() + h, idx.end());
    std::sort(hold.begin(), hold.end());
    std::sort(fit.begin(), fit.end());
    return {data.subset(fit), data.subset(hold)};
}

}  // namespace

DetectorBuilder build_detector(const ModelingDimensions& dims) {
    check_supported(dims);
    if (dims.loss.kind == LossKind::ShiftedHinge || (dims.family == ModelFamily::Hypersphere &&
                                                     dims.loss.kind == LossKind::Hinge)) {
        if (!(dims.loss.nu > 0.0 && dims.loss.nu <= 1.0)) throw Error(ErrorCode::InvalidNu, "nu must be in (0, 1]");
    }
    if (dims.feature_map.kind == FeatureMapKind::Neural && dims.family == ModelFamily::Hypersphere &&
        dims.feature_map.network.use_bias) {
        throw Error(ErrorCode::BiasTermsForbidden, "Deep SVDD networks must not have bias terms");
    }
    return DetectorBuilder(dims);
}

DetectorModel DetectorBuilder::fit(const Dataset& train) const {
    const auto& d = dims_;
    const auto& reg = d.regularization;
    train.validate();
    switch (d.family) {
        case ModelFamily::Gaussian:
            return {prob::fit_gaussian(train)};
        case ModelFamily::GaussianMixture:
            return {prob::fit_gmm(train, prob::GMMOptions{reg.components, reg.seed})};
        case ModelFamily::KernelDensity: {
            if (!reg.select_bandwidth) return {prob::fit_kde(train, d.feature_map.kernel)};
            auto [fit_part, hold] = holdout_split(train, reg.holdout_fraction, reg.seed);
            const double g = prob::select_bandwidth(fit_part, hold);
            return {prob::fit_kde(train, d.feature_map.kernel.with_gamma(g))};
        }
        case ModelFamily::ProbabilisticPCA:
            if (reg.subspace_dim < 1) throw Error(ErrorCode::InvalidConfig, "probabilistic PCA needs subspace_dim >= 1");
            return {prob::fit_ppca(train, reg.subspace_dim)};
        case ModelFamily::Ellipsoid:
            return {oneclass::fit_mve(train, oneclass::MVEOptions{reg.support_fraction, reg.contamination, 20, 10, reg.seed})};
        case ModelFamily::Hyperplane:
            return {oneclass::fit_ocsvm(train, kernel_or_linear(d.feature_map), d.loss.nu)};
        case ModelFamily::Hypersphere: {
            if (d.feature_map.kind != FeatureMapKind::Neural) {
                const KernelSpec k = kernel_or_linear(d.feature_map);
                if (train.labeled_only().size() > 0) {
                    oneclass::SemiSupervisedSVDDOptions o;
                    o.nu = d.loss.nu;
                    o.kappa = reg.kappa;
                    return {oneclass::fit_semisupervised_svdd(train, k, o)};
                }
                return {oneclass::fit_svdd(train, k, d.loss.nu)};
            }
            deep::DeepSVDDOptions o;
            o.nu = d.loss.nu;
            o.eta = reg.eta;
            if (d.loss.kind == LossKind::SemiSupExponent) {
                o.variant = deep::DeepSVDDVariant::SAD;
                return {deep::fit_deep_svdd(train.with_label(Label::Unlabeled), d.feature_map.network,
                                            reg.optimizer, o, train.labeled_only())};
            }
            o.variant = d.loss.kind == LossKind::Hinge ? deep::DeepSVDDVariant::SoftBoundary
                                                        : deep::DeepSVDDVariant::OneClass;
            return {deep::fit_deep_svdd(train, d.feature_map.network, reg.optimizer, o)};
        }
        case ModelFamily::Subspace:
            if (d.feature_map.kind == FeatureMapKind::Kernel) {
                return {recon::fit_kpca(train, d.feature_map.kernel, reg.variance_fraction)};
            }
            if (reg.subspace_dim > 0) return {recon::fit_pca_components(train, reg.subspace_dim)};
            return {recon::fit_pca(train, reg.variance_fraction)};
        case ModelFamily::Autoencoder: {
            auto [fit_part, hold] = holdout_split(train, reg.holdout_fraction, reg.seed);
            return {deep::fit_autoencoder(fit_part, d.feature_map.network, reg.optimizer, hold)};
        }
        case ModelFamily::Prototypes:
            return {recon::fit_vq(train, reg.components, reg.vq_norm, reg.seed)};
    }
    throw Error(ErrorCode::UnsupportedCombination, "model_family: unknown");
}

Label level_set_membership(const DetectorModel& model, PointView x) {
    if (!model.has_intrinsic_boundary()) {
        throw Error(ErrorCode::ModelHasNoIntrinsicBoundary,
                    model.method() + " has no intrinsic decision boundary; calibrate a threshold instead");
    }
    return model.score(x) < 0.0 ? Label::Normal : Label::Anomaly;
}

}  // namespace anoscope
