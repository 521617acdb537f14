#pragma once

// Probabilistic detectors. Every score is a negative log-likelihood (or a
// strictly increasing transform of one), so larger means more anomalous.

#include <cstdint>
#include <vector>

#include "anoscope/kernel.hpp"
#include "anoscope/types.hpp"

namespace anoscope::prob {

struct GaussianModel {
    RowVector mean;
    Matrix covariance;
    Matrix precision;
    double log_det = 0.0;

    /// Squared Mahalanobis distance to the mean.
    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
    /// Full negative log-likelihood.
    double nll(PointView x) const;
};

GaussianModel fit_gaussian(const Dataset& train);

struct GMMModel {
    Vector weights;
    std::vector<RowVector> means;
    std::vector<Matrix> covariances;
    std::vector<Matrix> precisions;
    std::vector<double> log_dets;
    /// Mean training log-likelihood after each EM iteration.
    std::vector<double> log_likelihood_trace;

    Index k() const { return weights.size(); }
    /// -log sum_k pi_k N(x; mu_k, Sigma_k)
    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
};

struct GMMOptions {
    Index k = 2;
    std::uint64_t seed = 0;
    int max_iter = 200;
    double tol = 1e-8;
};

GMMModel fit_gmm(const Dataset& train, const GMMOptions& opts);

/// Rebuilds precision/log-det caches after a covariance change.
void refresh_gmm_cache(GMMModel& m);

/**
 * Kernel density estimate with an unnormalized Gaussian (RBF or Mahalanobis)
 * kernel: score(x) = -log[(1/n) sum_i exp(-gamma d^2(x, x_i))].
 */
struct KDEModel {
    Matrix training_points;
    KernelSpec kernel;  // RBF or Mahalanobis; gamma lives here

    double gamma() const { return kernel.gamma; }
    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
    /// Normalized log density (includes the Gaussian normalizer).
    double log_density(PointView x) const;
};

KDEModel fit_kde(const Dataset& train, double gamma);
KDEModel fit_kde(const Dataset& train, const KernelSpec& kernel);

/// {(2^i D)^-1 : i = -5..5}, the log2 grid used throughout for kernel scales.
std::vector<double> gamma_grid(Index dim);

/// Gamma from `grid` maximizing the mean held-out log density.
double select_bandwidth(const Dataset& train, const Dataset& holdout, const std::vector<double>& grid);
double select_bandwidth(const Dataset& train, const Dataset& holdout);

/// Probabilistic PCA: x ~ N(mu, W W^T + sigma2 I) with W of size D x d.
struct PPCAModel {
    Matrix loadings;  // D x d
    double sigma2 = 0.0;
    RowVector mean;
    Matrix precision;  // cached (W W^T + sigma2 I)^-1
    double log_det = 0.0;

    Matrix model_covariance() const;
    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
};

PPCAModel fit_ppca(const Dataset& train, Index d);

}  // namespace anoscope::prob
