#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>

#include "anoscope/types.hpp"

namespace anoscope::data {

/**
 * Two noisy arcs in the plane: a large upper semicircle around the origin and
 * a small lower semicircle around `small_center`. A bimodal, two-scale,
 * non-convex normal class for the toy benchmark.
 */
struct TwoMoonsConfig {
    Index n_train = 1000;
    double big_radius = 2.0;
    double small_radius = 0.6;
    std::array<double, 2> small_center{1.5, 0.6};
    double noise_sigma_big = 0.2;
    double noise_sigma_small = 0.06;
    /// Share of points placed on the big arc (by arc length when unset).
    std::optional<double> big_fraction;
    std::uint64_t seed = 0;
};

Dataset gen_two_moons(const TwoMoonsConfig& cfg);

/// Axis-aligned box, lower/upper corner per dimension.
struct Box {
    RowVector lower;
    RowVector upper;

    Index dim() const { return lower.size(); }
};

/// Display range used for the two-moons anomalies.
Box two_moons_box();

/// m i.i.d. uniform points in `bounds`, all labeled Anomaly.
Dataset sample_uniform_anomalies(const Box& bounds, Index m, std::uint64_t seed);

struct ContaminationSpec {
    double eta = 0.0;
    Box anomaly_box;  // UniformBox sampler
};

struct ContaminationResult {
    Dataset data;
    std::vector<Index> replaced;  // rows that were swapped for anomalies
};

/// Replaces each row independently with probability eta by a uniform anomaly.
/// Labels are left untouched (the contamination is unnoticed).
ContaminationResult contaminate(const Dataset& normal, const ContaminationSpec& spec, std::uint64_t seed);

/// Per-feature median/IQR scaler. Zero-IQR columns are centered only.
struct RobustScaler {
    RowVector medians;
    RowVector iqrs;

    std::vector<Index> zero_iqr_features() const;
};

RobustScaler fit_robust_scaler(const Dataset& train);
Dataset apply_scaler(const RobustScaler& scaler, const Dataset& data);

struct Split {
    Dataset train;
    Dataset val;
    Dataset test;
};

/**
 * Random split preserving the anomaly share in each part. Rows labeled
 * Anomaly form one stratum, all other rows the other; each stratum is
 * shuffled and cut by the given fractions (largest-remainder rounding).
 */
Split stratified_split(const Dataset& data, std::array<double, 3> fractions, std::uint64_t seed);

enum class LabelEncoding {
    Signed,       // +1 normal, -1 anomaly
    OutlierFlag,  // 0 normal, 1 anomaly
};

struct CsvOptions {
    bool has_header = true;
    /// Zero-based label column; blank cells are unlabeled.
    std::optional<Index> label_column;
    LabelEncoding encoding = LabelEncoding::Signed;
};

Dataset load_csv(const std::string& path, const CsvOptions& opts);

/// Writes features (and a trailing `label` column when any row is labeled).
void save_csv(const std::string& path, const Dataset& data);

/// Label cell text: "1", "-1" or "".
std::string label_to_cell(Label l);

}  // namespace anoscope::data
