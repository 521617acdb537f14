#pragma once

// Reconstruction-based detectors: linear PCA, kernel PCA and vector
// quantization. Scores are reconstruction errors and are therefore >= 0.

#include <cstdint>
#include <random>
#include <vector>

#include "anoscope/kernel.hpp"
#include "anoscope/types.hpp"

namespace anoscope::recon {

struct PCAModel {
    RowVector mean;
    Matrix components;  // d x D, orthonormal rows
    Vector explained_variance;
    double variance_fraction = 0.0;  // fraction actually retained

    Index d() const { return components.rows(); }
    /// W^T W
    Matrix projector() const;
    /// ||(x - mu) - W^T W (x - mu)||^2
    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
};

/// Keeps the smallest number of components reaching `variance_fraction`.
PCAModel fit_pca(const Dataset& train, double variance_fraction = 0.9);

/// Keeps exactly `d` components.
PCAModel fit_pca_components(const Dataset& train, Index d);

/**
 * Kernel PCA with an out-of-sample reconstruction error in feature space.
 *
 * With phi~ the feature map centered on the training mean, the score is
 * ||phi~(x)||^2 - sum_j <phi~(x), v_j>^2, where every inner product expands
 * into kernel evaluations and the stored centering statistics.
 */
struct KPCAModel {
    Matrix training_points;
    KernelSpec kernel;
    Matrix coefficients;  // n x d, column j = eigvec_j / sqrt(lambda_j)
    Vector eigenvalues;   // of the centered Gram matrix, descending
    Vector kernel_row_means;
    double grand_mean = 0.0;
    double variance_fraction = 0.0;

    Index d() const { return coefficients.cols(); }
    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
};

KPCAModel fit_kpca(const Dataset& train, const KernelSpec& kernel, double variance_fraction = 0.9);

double kpca_score(const KPCAModel& model, PointView x);

/**
 * RBF scale from neighbor similarities: gamma is set so that half of all
 * neighbor pairs have similarity at least 1/2, i.e. the nearer 50% of
 * neighbors sit in the upper half of the similarity range
 * (gamma = ln 2 / median pairwise squared distance).
 */
double kpca_gamma_heuristic(const Dataset& train);

enum class VQNorm { L2, L1 };

struct VQModel {
    Matrix prototypes;  // K x D
    VQNorm norm = VQNorm::L2;
    /// Mean distance to the assigned prototype after each Lloyd iteration.
    std::vector<double> objective_trace;

    Index k() const { return prototypes.rows(); }
    /// Squared L2 distance (k-means) or L1 distance (k-medians) to the nearest prototype.
    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
    Index nearest(PointView x) const;
};

VQModel fit_vq(const Dataset& train, Index k, VQNorm norm, std::uint64_t seed, int max_iter = 300);

/// k-means++ seeding; returns indices of the chosen rows.
std::vector<Index> kmeanspp_seed(const Matrix& x, Index k, std::mt19937_64& rng);

}  // namespace anoscope::recon
