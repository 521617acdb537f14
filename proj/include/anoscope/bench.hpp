#pragma once

// End-to-end experiments shared by the CLI, the acceptance suite and the
// Python bindings: the two-moons method comparison, the thyroid pipeline and
// the planted-nuisance explanation fixture.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "anoscope/data.hpp"
#include "anoscope/eval.hpp"
#include "anoscope/types.hpp"

namespace anoscope::bench {

struct ToyBenchConfig {
    std::uint64_t seed = 7;
    Index n_train = 1000;
    Index n_test_normal = 500;
    Index n_test_anomaly = 100;
    Index n_val_normal = 200;
    Index n_val_anomaly = 40;
    bool include_deep = true;
};

struct MethodResult {
    std::string method;
    double auroc = 0.0;
    double ap = 0.0;
    std::string params;  // chosen hyperparameters, `key=value;...`
};

struct ToyBenchResult {
    std::vector<MethodResult> rows;

    const MethodResult& at(const std::string& method) const;
};

/**
 * Fits every method on one two-moons training sample and scores a test set of
 * normals plus uniform anomalies from the bounding box. KDE picks its
 * bandwidth on a 10% hold-out, SVDD and OC-SVM pick (nu, gamma) on a separate
 * labeled validation sample, kPCA uses the neighbor-similarity gamma.
 */
ToyBenchResult run_toy_benchmark(const ToyBenchConfig& cfg);

/// `method,auroc,ap,params` with 17 significant digits.
void write_toy_table(std::ostream& out, const ToyBenchResult& result);

struct ThyroidConfig {
    double nu = 0.15;
    std::uint64_t seed = 0;
    bool robust_scaling = true;
};

struct ThyroidResult {
    double gamma = 0.0;
    std::size_t gamma_index = 0;  // position in the gamma grid
    std::size_t grid_size = 0;
    bool at_grid_edge = false;
    double val_auroc = 0.0;
    eval::EvalReport test;
};

/**
 * Robust scaling (fit on the training split), stratified 60:10:30 split,
 * OC-SVM with fixed nu and gamma chosen by validation AUROC, then a test
 * report with the model's own boundary as the threshold.
 */
ThyroidResult run_thyroid_pipeline(const Dataset& data, const ThyroidConfig& cfg);

/// Labeled planted-nuisance data: anomalies deviate on `mask` features and
/// additionally on one wide-range nuisance feature.
struct NuisanceFixture {
    Dataset train;   // normals only
    Dataset probes;  // anomalies to explain
    Vector mask;     // 1 on the true anomaly features
    Index nuisance = 0;
};

NuisanceFixture planted_nuisance_fixture(std::uint64_t seed);

struct CleverHansResult {
    double rbf_accuracy = 0.0;
    double mahalanobis_accuracy = 0.0;
};

/// Mean explanation accuracy of RBF and Mahalanobis KDE heatmaps on the fixture.
CleverHansResult clever_hans_comparison(const NuisanceFixture& fixture, double gamma, double damping = 0.01);

}  // namespace anoscope::bench
