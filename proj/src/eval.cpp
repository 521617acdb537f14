#include "anoscope/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace anoscope::eval {

LabeledScores LabeledScores::from(const Vector& scores, const std::vector<Label>& labels) {
    if (static_cast<std::size_t>(scores.size()) != labels.size()) {
        throw Error(ErrorCode::DimensionMismatch, "score and label counts differ");
    }
    LabeledScores ls;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == Label::Unlabeled) continue;
        ls.pairs.push_back({scores(static_cast<Index>(i)), labels[i]});
    }
    return ls;
}

std::size_t LabeledScores::anomalies() const {
    return static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(), [](const ScoredLabel& p) { return p.truth == Label::Anomaly; }));
}

std::size_t LabeledScores::normals() const { return pairs.size() - anomalies(); }

namespace {

void require_both(const LabeledScores& ls) {
    if (ls.anomalies() == 0 || ls.normals() == 0) {
        throw Error(ErrorCode::SingleClass, "metric needs at least one normal and one anomaly");
    }
    for (const auto& p : ls.pairs) {
        if (!std::isfinite(p.score)) throw Error(ErrorCode::InvalidArgument, "scores must be finite");
    }
}

// Indices sorted by descending score; stable, so equal scores keep input order.
std::vector<std::size_t> descending(const LabeledScores& ls) {
    std::vector<std::size_t> idx(ls.pairs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return ls.pairs[a].score > ls.pairs[b].score; });
    return idx;
}

}  // namespace

double auroc(const LabeledScores& ls) {
    require_both(ls);
    // Midranks in ascending order.
    std::vector<std::size_t> idx(ls.pairs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return ls.pairs[a].score < ls.pairs[b].score; });
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && ls.pairs[idx[j + 1]].score == ls.pairs[idx[i]].score) ++j;
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            if (ls.pairs[idx[t]].truth == Label::Anomaly) rank_sum += midrank;
        }
        i = j + 1;
    }
    const auto a = static_cast<double>(ls.anomalies());
    const auto n = static_cast<double>(ls.normals());
    return (rank_sum - a * (a + 1.0) / 2.0) / (a * n);
}

std::vector<RocPoint> roc_curve(const LabeledScores& ls) {
    require_both(ls);
    const auto order = descending(ls);
    const auto a = static_cast<double>(ls.anomalies());
    const auto n = static_cast<double>(ls.normals());
    std::vector<RocPoint> curve{{0.0, 0.0}};
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = ls.pairs[order[i]].score;
        while (i < order.size() && ls.pairs[order[i]].score == s) {
            (ls.pairs[order[i]].truth == Label::Anomaly ? tp : fp)++;
            ++i;
        }
        curve.push_back({static_cast<double>(fp) / n, static_cast<double>(tp) / a});
    }
    return curve;
}

double trapezoid_area(const std::vector<RocPoint>& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double dx = curve[i].false_positive_rate - curve[i - 1].false_positive_rate;
        area += 0.5 * dx * (curve[i].true_positive_rate + curve[i - 1].true_positive_rate);
    }
    return area;
}

double average_precision(const LabeledScores& ls) {
    const std::size_t total = ls.anomalies();
    if (total == 0) throw Error(ErrorCode::NoAnomalies, "average precision needs at least one anomaly");
    const auto order = descending(ls);
    double sum = 0.0;
    std::size_t tp = 0;
    std::size_t seen = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = ls.pairs[order[i]].score;
        std::size_t group_tp = 0;
        while (i < order.size() && ls.pairs[order[i]].score == s) {
            if (ls.pairs[order[i]].truth == Label::Anomaly) ++group_tp;
            ++seen;
            ++i;
        }
        tp += group_tp;
        sum += static_cast<double>(group_tp) * static_cast<double>(tp) / static_cast<double>(seen);
    }
    return sum / static_cast<double>(total);
}

namespace {

std::size_t anomalies_in_top_k(const LabeledScores& ls, std::size_t k) {
    if (k < 1 || k > ls.size()) throw Error(ErrorCode::KOutOfRange, "k must be in [1, n]");
    const auto order = descending(ls);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (ls.pairs[order[i]].truth == Label::Anomaly) ++hits;
    }
    return hits;
}

}  // namespace

double precision_at_k(const LabeledScores& ls, std::size_t k) {
    return static_cast<double>(anomalies_in_top_k(ls, k)) / static_cast<double>(k);
}

double recall_at_k(const LabeledScores& ls, std::size_t k) {
    const std::size_t total = ls.anomalies();
    if (total == 0) throw Error(ErrorCode::NoAnomalies, "recall needs at least one anomaly");
    return static_cast<double>(anomalies_in_top_k(ls, k)) / static_cast<double>(total);
}

ThresholdMetrics threshold_metrics(const LabeledScores& ls, const core::DecisionThreshold& threshold) {
    require_both(ls);
    ThresholdMetrics m;
    for (const auto& p : ls.pairs) {
        const bool flagged = core::detect(p.score, threshold) == Label::Anomaly;
        if (p.truth == Label::Anomaly) {
            (flagged ? m.counts.true_positives : m.counts.false_negatives)++;
        } else {
            (flagged ? m.counts.false_positives : m.counts.true_negatives)++;
        }
    }
    m.false_alarm_rate = static_cast<double>(m.counts.false_positives) /
                         static_cast<double>(m.counts.false_positives + m.counts.true_negatives);
    m.miss_rate = static_cast<double>(m.counts.false_negatives) /
                  static_cast<double>(m.counts.false_negatives + m.counts.true_positives);
    return m;
}

EvalReport evaluate(const LabeledScores& ls, const std::vector<std::size_t>& ks,
                    const std::optional<core::DecisionThreshold>& threshold) {
    EvalReport r;
    r.auroc = auroc(ls);
    r.ap = average_precision(ls);
    for (std::size_t k : ks) {
        if (k < 1 || k > ls.size()) continue;
        r.precision_at_k[k] = precision_at_k(ls, k);
        r.recall_at_k[k] = recall_at_k(ls, k);
    }
    if (threshold) {
        r.threshold = threshold;
        r.threshold_metrics = threshold_metrics(ls, *threshold);
    }
    return r;
}

std::string to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["auroc"] = report.auroc;
    j["ap"] = report.ap;
    for (const auto& [k, v] : report.precision_at_k) j["precision_at_" + std::to_string(k)] = v;
    for (const auto& [k, v] : report.recall_at_k) j["recall_at_" + std::to_string(k)] = v;
    if (report.threshold) {
        j["tau"] = report.threshold->tau;
        j["alpha"] = report.threshold->alpha;
    }
    if (report.threshold_metrics) {
        const auto& t = *report.threshold_metrics;
        j["false_alarm_rate"] = t.false_alarm_rate;
        j["miss_rate"] = t.miss_rate;
        j["true_positives"] = t.counts.true_positives;
        j["false_positives"] = t.counts.false_positives;
        j["true_negatives"] = t.counts.true_negatives;
        j["false_negatives"] = t.counts.false_negatives;
    }
    return j.dump(2);
}

std::string to_csv(const EvalReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "metric,value\n";
    out << "auroc," << report.auroc << '\n';
    out << "ap," << report.ap << '\n';
    for (const auto& [k, v] : report.precision_at_k) out << "precision_at_" << k << ',' << v << '\n';
    for (const auto& [k, v] : report.recall_at_k) out << "recall_at_" << k << ',' << v << '\n';
    if (report.threshold) {
        out << "tau," << report.threshold->tau << '\n';
        out << "alpha," << report.threshold->alpha << '\n';
    }
    if (report.threshold_metrics) {
        const auto& t = *report.threshold_metrics;
        out << "false_alarm_rate," << t.false_alarm_rate << '\n';
        out << "miss_rate," << t.miss_rate << '\n';
        out << "true_positives," << t.counts.true_positives << '\n';
        out << "false_positives," << t.counts.false_positives << '\n';
        out << "true_negatives," << t.counts.true_negatives << '\n';
        out << "false_negatives," << t.counts.false_negatives << '\n';
    }
    return out.str();
}

}  // namespace anoscope::eval
