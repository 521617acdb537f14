#pragma once

// Small numerical helpers shared by the detector families.

#include <functional>
#include <vector>

#include "anoscope/types.hpp"

namespace anoscope::stats {

/// Linear-interpolation (type 7) quantile. `q` in [0, 1].
double quantile(std::vector<double> values, double q);

/// Same, for an already sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q);

double median(std::vector<double> values);

/// log(sum(exp(v))) without overflow.
double log_sum_exp(const Vector& v);

/// Column means.
RowVector mean(const Matrix& x);

/// Maximum-likelihood covariance (1/n denominator) around `mu`.
Matrix covariance_mle(const Matrix& x, const RowVector& mu);

/// Weighted version: sum_i w_i (x_i - mu)(x_i - mu)^T / sum_i w_i.
Matrix weighted_covariance(const Matrix& x, const Vector& w, const RowVector& mu);

/// Eigenpairs of a symmetric matrix, eigenvalues sorted in descending order.
struct SymmetricEigen {
    Vector values;
    Matrix vectors;  // columns
};
SymmetricEigen eigen_descending(const Matrix& s);

/// Adds floor * I when the smallest eigenvalue of `s` is below `floor`.
Matrix floor_covariance(const Matrix& s, double floor);

/// Default jitter floor: 1e-9 * trace / D, or 1e-12 for an all-zero matrix.
double jitter_floor(const Matrix& s);

/// Cached Gaussian quantities for a symmetric positive-definite covariance.
struct GaussianFactor {
    Matrix precision;
    double log_det = 0.0;
};
GaussianFactor factorize_covariance(const Matrix& cov);

/// (x - mu)^T P (x - mu).
double mahalanobis_sq(PointView x, const RowVector& mu, const Matrix& precision);

/// Log density of N(mu, Sigma) given a precomputed factor.
double gaussian_log_pdf(PointView x, const RowVector& mu, const GaussianFactor& f);

/// Runs body(i) for i in [0, n), split over at most `parallel_threads()` threads.
void parallel_for(Index n, const std::function<void(Index)>& body);

/// Scoring thread cap; reads ANOSCOPE_THREADS, defaults to hardware concurrency.
unsigned parallel_threads();

}  // namespace anoscope::stats
