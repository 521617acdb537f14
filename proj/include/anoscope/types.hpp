#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace anoscope {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// A single sample. Binds to matrix rows without copying.
using PointView = Eigen::Ref<const RowVector, 0, Eigen::InnerStride<>>;

enum class Label : std::int8_t { Anomaly = -1, Unlabeled = 0, Normal = 1 };

/// +1 for Normal, -1 for Anomaly, 0 for Unlabeled.
inline int label_sign(Label l) { return static_cast<int>(l); }

enum class ErrorCode {
    UnsupportedCombination,
    EmptyScores,
    AlphaOutOfRange,
    ModelHasNoIntrinsicBoundary,
    InvalidConfig,
    DegenerateBox,
    EmptyTrainingSet,
    FractionsInvalid,
    ParseError,
    MissingFile,
    TooFewSamples,
    SingularCovariance,
    DegenerateComponent,
    NonPositiveGamma,
    RankDeficient,
    SingularSubset,
    SolverNotConverged,
    InvalidNu,
    UnlabeledInput,
    NoLabeledValidation,
    NonPSDKernelMatrix,
    EmptyCluster,
    DimensionMismatch,
    Diverged,
    CollapseDetected,
    BiasTermsForbidden,
    NonPSDMatrix,
    ZeroHeatmap,
    SingleClass,
    NoAnomalies,
    KOutOfRange,
    ConfigError,
    IOError,
    InvalidArgument,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/**
 * n x D sample matrix (one row per observation) with per-row labels.
 *
 * Unlabeled rows are the bulk of most training sets; Normal/Anomaly rows
 * carry the few labels available in semi-supervised settings and in
 * validation/test splits.
 */
struct Dataset {
    Matrix rows;
    std::vector<Label> labels;
    std::vector<std::string> feature_names;

    Dataset() = default;
    Dataset(Matrix x, std::vector<Label> y, std::vector<std::string> names = {});

    /// Every row gets the same label.
    static Dataset uniform(Matrix x, Label label = Label::Unlabeled);

    Index size() const { return rows.rows(); }
    Index dim() const { return rows.cols(); }

    /// Throws InvalidArgument unless n >= 1, D >= 1, entries are finite and
    /// labels.size() == n.
    void validate() const;

    Dataset subset(std::span<const Index> idx) const;

    std::size_t count(Label l) const;

    /// Rows whose label matches `l`.
    Dataset with_label(Label l) const;
    /// Rows whose label is Normal or Anomaly.
    Dataset labeled_only() const;

    /// Appends rows of `other`; dimensions must agree.
    void append(const Dataset& other);
};

/// Concatenates datasets row-wise.
Dataset concat(const Dataset& a, const Dataset& b);

}  // namespace anoscope
