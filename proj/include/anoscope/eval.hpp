#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anoscope/core.hpp"
#include "anoscope/types.hpp"

namespace anoscope::eval {

struct ScoredLabel {
    double score;
    Label truth;  // Normal or Anomaly
};

/// Scores paired with ground truth. Unlabeled rows are dropped on construction.
struct LabeledScores {
    std::vector<ScoredLabel> pairs;

    static LabeledScores from(const Vector& scores, const std::vector<Label>& labels);

    std::size_t anomalies() const;
    std::size_t normals() const;
    std::size_t size() const { return pairs.size(); }
};

/// Mann-Whitney statistic: P(score_anomaly > score_normal) + 1/2 P(tie).
double auroc(const LabeledScores& ls);

struct RocPoint {
    double false_positive_rate;
    double true_positive_rate;
};

/// ROC curve with one vertex per distinct score (descending threshold).
std::vector<RocPoint> roc_curve(const LabeledScores& ls);

/// Trapezoidal area under a ROC curve.
double trapezoid_area(const std::vector<RocPoint>& curve);

/**
 * Average precision: mean precision at the ranks of the anomalies. Tied scores
 * form one group; every anomaly in a group is credited with the precision
 * measured at the end of that group.
 */
double average_precision(const LabeledScores& ls);

double precision_at_k(const LabeledScores& ls, std::size_t k);
double recall_at_k(const LabeledScores& ls, std::size_t k);

struct ConfusionCounts {
    std::size_t true_positives = 0;   // flagged anomalies
    std::size_t false_positives = 0;  // flagged normals
    std::size_t true_negatives = 0;
    std::size_t false_negatives = 0;  // missed anomalies
};

struct ThresholdMetrics {
    double false_alarm_rate = 0.0;
    double miss_rate = 0.0;
    ConfusionCounts counts;
};

/// Rates at `threshold`, flagging with core::detect (score >= tau).
ThresholdMetrics threshold_metrics(const LabeledScores& ls, const core::DecisionThreshold& threshold);

struct EvalReport {
    double auroc = 0.0;
    double ap = 0.0;
    std::map<std::size_t, double> precision_at_k;
    std::map<std::size_t, double> recall_at_k;
    std::optional<core::DecisionThreshold> threshold;
    std::optional<ThresholdMetrics> threshold_metrics;
};

/// Full report; k values outside [1, n] are skipped.
EvalReport evaluate(const LabeledScores& ls, const std::vector<std::size_t>& ks,
                    const std::optional<core::DecisionThreshold>& threshold = std::nullopt);

/// Key/value JSON object.
std::string to_json(const EvalReport& report);
/// Two-column `metric,value` CSV.
std::string to_csv(const EvalReport& report);

}  // namespace anoscope::eval
