#pragma once

#include "anoscope/types.hpp"

namespace anoscope {

enum class KernelKind { Linear, RBF, Mahalanobis };

const char* to_string(KernelKind kind);

/**
 * Positive semi-definite kernel k(x, y).
 *
 *   Linear       k = <x, y>
 *   RBF          k = exp(-gamma ||x - y||^2)
 *   Mahalanobis  k = exp(-gamma (x - y)^T M (x - y)),  M symmetric PSD
 *
 * The Mahalanobis kernel is an RBF kernel on the linearly transformed inputs
 * L x with M = L^T L; `transform` exposes that map so Gram matrices can be
 * built with dense products.
 */
struct KernelSpec {
    KernelKind kind = KernelKind::RBF;
    double gamma = 1.0;
    Matrix metric;      // M, Mahalanobis only
    Matrix transform_;  // L (D x D), Mahalanobis only

    static KernelSpec linear();
    static KernelSpec rbf(double gamma);
    /// Throws NonPSDMatrix if M is not symmetric PSD.
    static KernelSpec mahalanobis(const Matrix& m, double gamma);

    bool is_stationary() const { return kind != KernelKind::Linear; }
    /// k(x, x) is the same for every x (true for RBF and Mahalanobis).
    bool has_constant_diagonal() const { return is_stationary(); }

    /// Squared distance in the kernel's input geometry (Euclidean or Mahalanobis).
    double sq_distance(PointView a, PointView b) const;
    double operator()(PointView a, PointView b) const;

    /// Copy with a different gamma.
    KernelSpec with_gamma(double g) const;

    /// Rows mapped through L (identity for Linear/RBF).
    Matrix transform(const Matrix& x) const;
};

/// K_ij = k(x_i, x_j).
Matrix gram(const KernelSpec& k, const Matrix& x);
/// K_ij = k(a_i, b_j).
Matrix cross_gram(const KernelSpec& k, const Matrix& a, const Matrix& b);
/// Pairwise squared distances in the kernel geometry.
Matrix pairwise_sq_distances(const KernelSpec& k, const Matrix& a, const Matrix& b);

}  // namespace anoscope
