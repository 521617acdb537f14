#include "anoscope/explain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "anoscope/stats.hpp"

namespace anoscope::explain {

Vector NeuralizedKDE::distance_layer(PointView x) const {
    Vector h(points.rows());
    for (Index j = 0; j < points.rows(); ++j) h(j) = kernel.gamma * kernel.sq_distance(x, points.row(j)) + log_n;
    return h;
}

double NeuralizedKDE::soft_min(const Vector& h) { return -stats::log_sum_exp(-h); }

NeuralizedKDE neuralize_kde(const prob::KDEModel& model) {
    return NeuralizedKDE{model.training_points, model.kernel,
                         std::log(static_cast<double>(model.training_points.rows()))};
}

namespace {

Matrix metric_of(const KernelSpec& k, Index dim) {
    return k.kind == KernelKind::Mahalanobis ? k.metric : Matrix::Identity(dim, dim);
}

// Softmax weights exp(-gamma d_j^2) / sum_i exp(-gamma d_i^2), i.e. e_j / (n f(x)).
Vector pooling_weights(const prob::KDEModel& model, PointView x) {
    const Index n = model.training_points.rows();
    Vector a(n);
    for (Index j = 0; j < n; ++j) a(j) = -model.gamma() * model.kernel.sq_distance(x, model.training_points.row(j));
    return (a.array() - stats::log_sum_exp(a)).exp();
}

}  // namespace

Vector score_gradient_wrt_point(const prob::KDEModel& model, PointView x, Index j) {
    const Vector w = pooling_weights(model, x);
    const Matrix m = metric_of(model.kernel, model.training_points.cols());
    const Vector diff = (model.training_points.row(j) - x).transpose();
    return 2.0 * model.gamma() * w(j) * (m * diff);
}

Vector score_gradient_wrt_probe(const prob::KDEModel& model, PointView x) {
    const Vector w = pooling_weights(model, x);
    const Matrix m = metric_of(model.kernel, model.training_points.cols());
    const Vector weighted = ((model.training_points.rowwise() - x).array().colwise() * w.array()).colwise().sum().transpose();
    return -2.0 * model.gamma() * (m * weighted);
}

Heatmap lrp_heatmap(const prob::KDEModel& model, PointView x, GradientTarget target) {
    const Matrix diffs = model.training_points.rowwise() - x;
    Heatmap h;
    h.score = model.score(x);
    if (target == GradientTarget::Probe) {
        h.relevance = 0.5 * diffs.colwise().sum().transpose().cwiseProduct(score_gradient_wrt_probe(model, x));
        return h;
    }
    const Vector w = pooling_weights(model, x);
    const Matrix m = metric_of(model.kernel, model.training_points.cols());
    // 1/2 sum_j (x_j - x) * 2 gamma w_j M (x_j - x)
    const Matrix md = diffs * m;
    h.relevance = model.gamma() * (diffs.cwiseProduct(md).array().colwise() * w.array()).colwise().sum().transpose();
    return h;
}

std::vector<Heatmap> lrp_heatmaps(const prob::KDEModel& model, const Matrix& probes, GradientTarget target) {
    std::vector<Heatmap> out(static_cast<std::size_t>(probes.rows()));
    stats::parallel_for(probes.rows(),
                        [&](Index i) { out[static_cast<std::size_t>(i)] = lrp_heatmap(model, probes.row(i), target); });
    return out;
}

KernelSpec mahalanobis_kernel(const Matrix& m, double gamma) { return KernelSpec::mahalanobis(m, gamma); }

double explanation_accuracy(const Heatmap& heatmap, const Vector& mask) {
    if (heatmap.relevance.size() != mask.size()) throw Error(ErrorCode::DimensionMismatch, "mask and heatmap sizes differ");
    const double rn = heatmap.relevance.norm();
    if (rn == 0.0) throw Error(ErrorCode::ZeroHeatmap, "cannot score an all-zero heatmap");
    const double mn = mask.norm();
    if (mn == 0.0) throw Error(ErrorCode::InvalidArgument, "mask must mark at least one feature");
    return heatmap.relevance.dot(mask) / (rn * mn);
}

void write_heatmaps_csv(std::ostream& out, const std::vector<Heatmap>& heatmaps) {
    const Index dim = heatmaps.empty() ? 0 : heatmaps.front().relevance.size();
    out << "probe_id,score";
    for (Index d = 0; d < dim; ++d) out << ",R_" << d + 1;
    out << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < heatmaps.size(); ++i) {
        out << i << ',' << heatmaps[i].score;
        for (Index d = 0; d < heatmaps[i].relevance.size(); ++d) out << ',' << heatmaps[i].relevance(d);
        out << '\n';
    }
}

void write_heatmaps_csv(const std::string& path, const std::vector<Heatmap>& heatmaps) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IOError, "cannot open '" + path + "' for writing");
    write_heatmaps_csv(f, heatmaps);
    if (!f) throw Error(ErrorCode::IOError, "failed writing '" + path + "'");
}

void write_pgm(std::ostream& out, const Vector& values, Index width, Index height) {
    if (width < 1 || height < 1 || values.size() != width * height) {
        throw Error(ErrorCode::DimensionMismatch, "grid size differs from value count");
    }
    const double lo = values.minCoeff();
    const double span = values.maxCoeff() - lo;
    out << "P5\n" << width << ' ' << height << "\n255\n";
    for (Index i = 0; i < values.size(); ++i) {
        const double t = span > 0.0 ? (values(i) - lo) / span : 0.0;
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
    }
}

}  // namespace anoscope::explain
