#pragma once

// KDE as a two-layer network (distance layer, soft-min pooling) and the
// relevance heatmaps derived from it.

#include <iosfwd>
#include <string>
#include <vector>

#include "anoscope/kernel.hpp"
#include "anoscope/prob.hpp"
#include "anoscope/types.hpp"

namespace anoscope::explain {

/**
 * h_j(x) = gamma * dist^2(x, x_j) + log n, pooled by
 * smin(h) = -log sum_j exp(-h_j), which equals the KDE score.
 */
struct NeuralizedKDE {
    Matrix points;
    KernelSpec kernel;
    double log_n = 0.0;

    Vector distance_layer(PointView x) const;
    static double soft_min(const Vector& h);
    double score(PointView x) const { return soft_min(distance_layer(x)); }
};

NeuralizedKDE neuralize_kde(const prob::KDEModel& model);

struct Heatmap {
    Vector relevance;
    double score = 0.0;
};

enum class GradientTarget {
    TrainingPoints,  // R = 1/2 sum_j (x_j - x) * grad_{x_j} s(x)
    Probe,           // R = 1/2 sum_j (x_j - x) * grad_x s(x)
};

/// Gradient of the KDE score with respect to training point j.
Vector score_gradient_wrt_point(const prob::KDEModel& model, PointView x, Index j);
/// Gradient of the KDE score with respect to the probe.
Vector score_gradient_wrt_probe(const prob::KDEModel& model, PointView x);

/**
 * Taylor-type relevance of each input feature for the KDE score at x. With
 * training-point gradients and an RBF kernel this is
 *   R = gamma / (n f(x)) sum_j exp(-gamma d_j^2) (x_j - x)^2  >= 0.
 */
Heatmap lrp_heatmap(const prob::KDEModel& model, PointView x,
                    GradientTarget target = GradientTarget::TrainingPoints);

std::vector<Heatmap> lrp_heatmaps(const prob::KDEModel& model, const Matrix& probes,
                                  GradientTarget target = GradientTarget::TrainingPoints);

/// exp(-gamma (x - y)^T M (x - y)); M = I gives the RBF kernel.
KernelSpec mahalanobis_kernel(const Matrix& m, double gamma = 1.0);

/// Cosine similarity between relevance and a {0,1} ground-truth mask.
double explanation_accuracy(const Heatmap& heatmap, const Vector& mask);

/// CSV with header `probe_id,score,R_1..R_D`, one row per heatmap.
void write_heatmaps_csv(std::ostream& out, const std::vector<Heatmap>& heatmaps);
void write_heatmaps_csv(const std::string& path, const std::vector<Heatmap>& heatmaps);

/// Binary 8-bit PGM of a row-major width x height grid, min-max scaled.
void write_pgm(std::ostream& out, const Vector& values, Index width, Index height);

}  // namespace anoscope::explain
