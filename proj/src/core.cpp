#include "anoscope/core.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace anoscope::core {

DecisionThreshold calibrate_threshold(const Vector& scores, double alpha) {
    if (scores.size() == 0) throw Error(ErrorCode::EmptyScores, "cannot calibrate on an empty score sample");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "alpha must be in [0, 1]");
    if (!scores.allFinite()) throw Error(ErrorCode::InvalidArgument, "scores must be finite");

    std::vector<double> s(scores.data(), scores.data() + scores.size());
    std::sort(s.begin(), s.end());
    const auto n = static_cast<double>(s.size());
    // Smallest count c with c / n >= 1 - alpha, robust to rounding of (1 - alpha) n.
    const double need = std::ceil((1.0 - alpha) * n - 1e-9);
    const auto c = static_cast<std::size_t>(std::clamp(need, 0.0, n));
    // tau = s[c-1]; with ties, #{s_i <= tau} only grows, so the condition holds.
    const double tau = c == 0 ? s.front() : s[c - 1];
    return DecisionThreshold{tau, alpha};
}

}  // namespace anoscope::core
