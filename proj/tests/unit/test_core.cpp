#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "anoscope/core.hpp"
#include "helpers.hpp"

using namespace anoscope;
using core::calibrate_threshold;
using core::DecisionThreshold;
using core::detect;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Smallest sample value t with #{s <= t} / n >= 1 - alpha, by enumeration.
double brute_force_tau(const Vector& s, double alpha) {
    std::vector<double> cands(s.data(), s.data() + s.size());
    std::sort(cands.begin(), cands.end());
    const auto n = static_cast<double>(s.size());
    for (double t : cands) {
        const auto below = static_cast<double>((s.array() <= t).count());
        if (below / n >= 1.0 - alpha - 1e-12) return t;
    }
    return cands.back();
}

}  // namespace

TEST(CalibrateThreshold, QuarterAlphaPicksThirdValue) {
    EXPECT_DOUBLE_EQ(calibrate_threshold(vec({0.1, 0.2, 0.3, 0.4}), 0.25).tau, 0.3);
}

TEST(CalibrateThreshold, ZeroAlphaPicksMaximum) {
    EXPECT_DOUBLE_EQ(calibrate_threshold(vec({0.1, 0.2, 0.3, 0.4}), 0.0).tau, 0.4);
}

TEST(CalibrateThreshold, TiesCollapseToOneCut) {
    EXPECT_DOUBLE_EQ(calibrate_threshold(vec({5, 5, 5}), 0.5).tau, 5.0);
}

TEST(CalibrateThreshold, UnitAlphaPicksMinimum) {
    EXPECT_DOUBLE_EQ(calibrate_threshold(vec({0.4, 0.1, 0.3}), 1.0).tau, 0.1);
}

TEST(CalibrateThreshold, KeepsAlpha) { EXPECT_DOUBLE_EQ(calibrate_threshold(vec({1, 2}), 0.3).alpha, 0.3); }

TEST(CalibrateThreshold, RejectsEmptyAndBadAlpha) {
    try {
        calibrate_threshold(Vector(0), 0.1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyScores);
    }
    for (double a : {-0.1, 1.1, std::nan("")}) {
        try {
            calibrate_threshold(vec({1, 2}), a);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::AlphaOutOfRange);
        }
    }
}

TEST(CalibrateThreshold, MatchesEnumerationAndBoundsFalseAlarms) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Index n = 1 + static_cast<Index>(seed % 23);
        Vector s = fixtures::random_matrix(n, 1, seed).col(0);
        // Coarsen to force ties on some seeds.
        if (seed % 3 == 0) s = (s.array() * 2.0).round();
        for (double alpha : {0.0, 0.05, 0.1, 0.25, 0.5, 0.9, 1.0}) {
            const auto th = calibrate_threshold(s, alpha);
            EXPECT_DOUBLE_EQ(th.tau, brute_force_tau(s, alpha)) << "seed " << seed << " alpha " << alpha;
            const auto above = static_cast<double>((s.array() > th.tau).count());
            EXPECT_LE(above, std::ceil(alpha * static_cast<double>(n)));
        }
    }
}

TEST(Detect, BoundaryIsInclusive) {
    const DecisionThreshold th{0.5, 0.1};
    EXPECT_EQ(detect(1.0, th), Label::Anomaly);
    EXPECT_EQ(detect(0.5, th), Label::Anomaly);
    EXPECT_EQ(detect(0.49, th), Label::Normal);
}

TEST(Detect, MonotoneInScore) {
    const DecisionThreshold th{0.0, 0.1};
    bool flagged = false;
    for (double s = -2.0; s <= 2.0; s += 0.125) {
        const bool now = detect(s, th) == Label::Anomaly;
        EXPECT_TRUE(now || !flagged);
        flagged = now;
    }
}
