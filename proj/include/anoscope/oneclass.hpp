#pragma once

// One-class classifiers: minimum-volume ellipsoid (via MCD), kernel SVDD and
// the one-class SVM. Scores are signed decision values: negative inside the
// estimated level set, positive outside.

#include <cstdint>
#include <vector>

#include "anoscope/kernel.hpp"
#include "anoscope/types.hpp"

namespace anoscope::oneclass {

// ---- Minimum-volume ellipsoid ----------------------------------------------

struct MVEOptions {
    double support_fraction = 0.9;
    double contamination = 0.01;
    int n_starts = 20;
    int c_steps = 10;
    std::uint64_t seed = 0;
};

struct MVEModel {
    RowVector center;
    Matrix shape;      // Sigma
    Matrix precision;  // Sigma^-1
    double radius2 = 0.0;
    double support_fraction = 0.9;
    std::vector<Index> support;  // indices of the h-subset
    /// det(Sigma) after each C-step of the winning start.
    std::vector<double> determinant_trace;

    /// (x - c)^T Sigma^-1 (x - c) - R^2
    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
};

MVEModel fit_mve(const Dataset& train, const MVEOptions& opts = {});

// ---- Dual solver -----------------------------------------------------------

struct SolverOptions {
    double tolerance = 1e-6;   // KKT violation (max gradient gap)
    long max_iter = 100000;    // pairwise updates
};

struct DualSolution {
    Vector alpha;
    Vector gradient;  // Q alpha + p at the solution
    long iterations = 0;
    double kkt_gap = 0.0;
    double objective = 0.0;
};

/**
 * min_a 1/2 a^T Q a + p^T a   s.t. 0 <= a_i <= upper, sum_i a_i = 1
 *
 * Pairwise (SMO) updates with second-order working-set selection. Throws
 * SolverNotConverged after `max_iter` updates and InvalidArgument when the
 * feasible set is empty (n * upper < 1).
 */
DualSolution solve_simplex_box_qp(const Matrix& q, const Vector& p, double upper, const SolverOptions& opts = {});

// ---- SVDD / OC-SVM -----------------------------------------------------------

struct SVDDModel {
    Matrix training_points;
    Vector alphas;  // length n, in [0, 1/(nu n)], summing to 1
    KernelSpec kernel;
    std::vector<Index> support_indices;  // alpha > 0
    double radius2 = 0.0;
    double nu = 0.0;
    double center_norm2 = 0.0;  // alpha^T K alpha = ||c||^2
    long iterations = 0;

    /// ||phi(x) - c||^2 - R^2
    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
    double sq_distance_to_center(PointView x) const;
};

struct OCSVMModel {
    Matrix training_points;
    Vector alphas;
    KernelSpec kernel;
    std::vector<Index> support_indices;
    double rho = 0.0;
    double nu = 0.0;
    long iterations = 0;

    /// rho - sum_i alpha_i k(x, x_i)
    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
};

SVDDModel fit_svdd(const Dataset& train, const KernelSpec& kernel, double nu, const SolverOptions& opts = {});
OCSVMModel fit_ocsvm(const Dataset& train, const KernelSpec& kernel, double nu, const SolverOptions& opts = {});

/// Same fits on a precomputed Gram matrix of `train`.
SVDDModel fit_svdd_gram(const Matrix& train, const Matrix& gram, const KernelSpec& kernel, double nu,
                        const SolverOptions& opts = {});
OCSVMModel fit_ocsvm_gram(const Matrix& train, const Matrix& gram, const KernelSpec& kernel, double nu,
                          const SolverOptions& opts = {});

// ---- Semi-supervised SVDD ------------------------------------------------------

/**
 * Kernel SVDD with labeled examples, loss max(0, y s) on labeled points.
 * The center c = sum_i beta_i phi(z_i) is expanded over all training rows
 * (unlabeled and labeled); (beta, R^2) are fitted by subgradient descent on
 *
 *   R^2 + 1/(nu n) sum_unlabeled max(0, s_i) + kappa/m sum_labeled max(0, y_j s_j).
 */
struct SemiSupervisedSVDDOptions {
    double nu = 0.1;
    double kappa = 1.0;
    int epochs = 500;
    double learning_rate = 0.05;
};

struct SemiSupervisedSVDDModel {
    Matrix expansion_points;
    Vector beta;
    KernelSpec kernel;
    double radius2 = 0.0;
    double center_norm2 = 0.0;
    std::vector<double> objective_trace;

    double score(PointView x) const;
    Vector score_batch(const Matrix& x) const;
};

SemiSupervisedSVDDModel fit_semisupervised_svdd(const Dataset& train, const KernelSpec& kernel,
                                                const SemiSupervisedSVDDOptions& opts);

// ---- Loss and model selection ------------------------------------------------

/// Shifted, cost-weighted hinge: max(0,s)/(1+nu) for Normal, nu max(0,-s)/(1+nu) for Anomaly.
double one_class_hinge(double s, Label y, double nu);

/// Semi-supervised hinge max(0, y s).
double semisupervised_hinge(double s, Label y);

enum class OneClassMethod { SVDD, OCSVM };

struct GridCell {
    double nu;
    double gamma;
    double val_auroc;
};

struct GridSearchResult {
    double nu = 0.0;
    double gamma = 0.0;
    double val_auroc = 0.0;
    std::vector<GridCell> cells;
};

/// {0.01, 0.05, 0.1, 0.2}
std::vector<double> default_nu_grid();

/**
 * Exhaustive search over (nu, gamma) maximizing validation AUROC. Models are
 * fitted on all rows of `train`; `val` must contain labeled normals and
 * anomalies. Ties prefer the larger gamma, then the earlier nu.
 * `base` supplies the kernel family (RBF or Mahalanobis); its gamma is replaced.
 */
GridSearchResult select_nu_and_gamma(const Dataset& train, const Dataset& val, const std::vector<double>& nus,
                                     const std::vector<double>& gammas, OneClassMethod method = OneClassMethod::SVDD,
                                     const KernelSpec& base = KernelSpec::rbf(1.0));

}  // namespace anoscope::oneclass
