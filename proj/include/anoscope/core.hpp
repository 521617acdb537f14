#pragma once

// Score orientation is global: larger score = more anomalous.

#include "anoscope/types.hpp"

namespace anoscope::core {

struct DecisionThreshold {
    double tau = 0.0;
    double alpha = 0.0;
};

/**
 * Empirical (1 - alpha)-quantile threshold of a calibration score sample.
 *
 * tau is the smallest sample value t with #{s_i <= t} / n >= 1 - alpha, so
 * flagging s >= tau leaves at most alpha * n calibration points strictly
 * above tau. alpha = 0 gives the maximum, alpha = 1 the minimum.
 */
DecisionThreshold calibrate_threshold(const Vector& scores, double alpha);

/// Anomaly iff score >= tau (ties at the boundary are anomalies).
inline Label detect(double score, const DecisionThreshold& threshold) {
    return score >= threshold.tau ? Label::Anomaly : Label::Normal;
}

}  // namespace anoscope::core
