#include "anoscope/types.hpp"

#include <algorithm>

namespace anoscope {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnsupportedCombination: return "UnsupportedCombination";
        case ErrorCode::EmptyScores: return "EmptyScores";
        case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
        case ErrorCode::ModelHasNoIntrinsicBoundary: return "ModelHasNoIntrinsicBoundary";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::DegenerateBox: return "DegenerateBox";
        case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorCode::FractionsInvalid: return "FractionsInvalid";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::SingularCovariance: return "SingularCovariance";
        case ErrorCode::DegenerateComponent: return "DegenerateComponent";
        case ErrorCode::NonPositiveGamma: return "NonPositiveGamma";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::SingularSubset: return "SingularSubset";
        case ErrorCode::SolverNotConverged: return "SolverNotConverged";
        case ErrorCode::InvalidNu: return "InvalidNu";
        case ErrorCode::UnlabeledInput: return "UnlabeledInput";
        case ErrorCode::NoLabeledValidation: return "NoLabeledValidation";
        case ErrorCode::NonPSDKernelMatrix: return "NonPSDKernelMatrix";
        case ErrorCode::EmptyCluster: return "EmptyCluster";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::Diverged: return "Diverged";
        case ErrorCode::CollapseDetected: return "CollapseDetected";
        case ErrorCode::BiasTermsForbidden: return "BiasTermsForbidden";
        case ErrorCode::NonPSDMatrix: return "NonPSDMatrix";
        case ErrorCode::ZeroHeatmap: return "ZeroHeatmap";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::NoAnomalies: return "NoAnomalies";
        case ErrorCode::KOutOfRange: return "KOutOfRange";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IOError: return "IOError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Dataset::Dataset(Matrix x, std::vector<Label> y, std::vector<std::string> names)
    : rows(std::move(x)), labels(std::move(y)), feature_names(std::move(names)) {}

Dataset Dataset::uniform(Matrix x, Label label) {
    std::vector<Label> y(static_cast<std::size_t>(x.rows()), label);
    return Dataset(std::move(x), std::move(y));
}

void Dataset::validate() const {
    if (rows.rows() < 1 || rows.cols() < 1) {
        throw Error(ErrorCode::InvalidArgument, "dataset must have at least one row and one column");
    }
    if (static_cast<Index>(labels.size()) != rows.rows()) {
        throw Error(ErrorCode::InvalidArgument, "label count does not match row count");
    }
    if (!rows.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "dataset contains non-finite entries");
    }
    if (!feature_names.empty() && static_cast<Index>(feature_names.size()) != rows.cols()) {
        throw Error(ErrorCode::InvalidArgument, "feature name count does not match column count");
    }
}

Dataset Dataset::subset(std::span<const Index> idx) const {
    Matrix x(static_cast<Index>(idx.size()), rows.cols());
    std::vector<Label> y;
    y.reserve(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        x.row(static_cast<Index>(k)) = rows.row(idx[k]);
        y.push_back(labels[static_cast<std::size_t>(idx[k])]);
    }
    return Dataset(std::move(x), std::move(y), feature_names);
}

std::size_t Dataset::count(Label l) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

Dataset Dataset::with_label(Label l) const {
    std::vector<Index> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == l) idx.push_back(static_cast<Index>(i));
    }
    return subset(idx);
}

Dataset Dataset::labeled_only() const {
    std::vector<Index> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != Label::Unlabeled) idx.push_back(static_cast<Index>(i));
    }
    return subset(idx);
}

void Dataset::append(const Dataset& other) {
    if (rows.size() == 0) {
        *this = other;
        return;
    }
    if (other.rows.rows() == 0) return;
    if (other.dim() != dim()) {
        throw Error(ErrorCode::DimensionMismatch, "cannot append datasets of different dimension");
    }
    Matrix x(rows.rows() + other.rows.rows(), rows.cols());
    x << rows, other.rows;
    rows = std::move(x);
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

Dataset concat(const Dataset& a, const Dataset& b) {
    Dataset out = a;
    out.append(b);
    return out;
}

}  // namespace anoscope
