#pragma once

// The unified detector contract: a (loss, model family, feature map,
// regularization) tuple selects one trainer, and every fitted model scores
// with "larger = more anomalous".

#include <cstdint>
#include <string>
#include <variant>

#include "anoscope/deep.hpp"
#include "anoscope/kernel.hpp"
#include "anoscope/oneclass.hpp"
#include "anoscope/prob.hpp"
#include "anoscope/recon.hpp"
#include "anoscope/types.hpp"

namespace anoscope {

enum class LossKind { NegLogLikelihood, Hinge, ShiftedHinge, LinearOneClass, SemiSupExponent, SquaredError };

struct Loss {
    LossKind kind = LossKind::NegLogLikelihood;
    double nu = 0.1;  // ShiftedHinge only

    static Loss shifted_hinge(double nu) { return {LossKind::ShiftedHinge, nu}; }
};

enum class ModelFamily {
    Gaussian,
    GaussianMixture,
    KernelDensity,
    ProbabilisticPCA,
    Ellipsoid,
    Hypersphere,
    Hyperplane,
    Subspace,
    Autoencoder,
    Prototypes,
};

enum class FeatureMapKind { RawInput, Kernel, Neural };

struct FeatureMap {
    FeatureMapKind kind = FeatureMapKind::RawInput;
    KernelSpec kernel;
    deep::MLPSpec network;

    static FeatureMap raw() { return {}; }
    static FeatureMap with_kernel(const KernelSpec& k) { return {FeatureMapKind::Kernel, k, {}}; }
    static FeatureMap neural(const deep::MLPSpec& net) { return {FeatureMapKind::Neural, {}, net}; }
};

/// Per-family capacity and training controls; fields a family does not use are ignored.
struct Regularization {
    Index components = 2;               // GMM K, VQ K
    Index subspace_dim = 0;             // PCA / pPCA d; 0 = use variance_fraction (pPCA requires d)
    double variance_fraction = 0.9;     // PCA, kPCA
    recon::VQNorm vq_norm = recon::VQNorm::L2;
    double support_fraction = 0.9;      // MVE
    double contamination = 0.01;        // MVE
    double kappa = 1.0;                 // semi-supervised SVDD
    double eta = 1.0;                   // Deep SAD
    double holdout_fraction = 0.1;      // autoencoder early stopping, KDE bandwidth
    bool select_bandwidth = false;      // KDE: choose gamma on a hold-out split
    deep::OptimizerSpec optimizer;
    std::uint64_t seed = 0;
};

/// Inference is always frequentist (point estimates).
struct ModelingDimensions {
    Loss loss;
    ModelFamily family = ModelFamily::Gaussian;
    FeatureMap feature_map;
    Regularization regularization;
};

const char* to_string(LossKind k);
const char* to_string(ModelFamily f);
const char* to_string(FeatureMapKind k);

using ModelVariant = std::variant<prob::GaussianModel, prob::GMMModel, prob::KDEModel, prob::PPCAModel,
                                  oneclass::MVEModel, oneclass::SVDDModel, oneclass::OCSVMModel,
                                  oneclass::SemiSupervisedSVDDModel, recon::PCAModel, recon::KPCAModel,
                                  recon::VQModel, deep::AEModel, deep::DeepSVDDModel>;

struct DetectorModel {
    ModelVariant model;

    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
    /// Short method tag (gaussian, gmm, kde, ppca, mve, svdd, ocsvm, ssvdd, pca, kpca, vq, ae, dsvdd).
    std::string method() const;
    /// True for models whose score is a signed decision value with the boundary at 0.
    bool has_intrinsic_boundary() const;
};

class DetectorBuilder {
public:
    explicit DetectorBuilder(ModelingDimensions dims) : dims_(std::move(dims)) {}

    const ModelingDimensions& dimensions() const { return dims_; }
    /// Fits on all rows; labeled rows are used only by the semi-supervised trainers.
    DetectorModel fit(const Dataset& train) const;

private:
    ModelingDimensions dims_;
};

/// Throws UnsupportedCombination naming the dimension that rules the tuple out.
DetectorBuilder build_detector(const ModelingDimensions& dims);

/// Normal iff the model's decision value at x is negative. Throws
/// ModelHasNoIntrinsicBoundary for density and reconstruction models.
Label level_set_membership(const DetectorModel& model, PointView x);

}  // namespace anoscope
