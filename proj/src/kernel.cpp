#include "anoscope/kernel.hpp"

#include <cmath>

namespace anoscope {

const char* to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::Linear: return "linear";
        case KernelKind::RBF: return "rbf";
        case KernelKind::Mahalanobis: return "mahalanobis";
    }
    return "unknown";
}

KernelSpec KernelSpec::linear() {
    KernelSpec k;
    k.kind = KernelKind::Linear;
    k.gamma = 0.0;
    return k;
}

KernelSpec KernelSpec::rbf(double gamma) {
    if (!(gamma > 0.0)) throw Error(ErrorCode::NonPositiveGamma, "RBF gamma must be positive");
    KernelSpec k;
    k.kind = KernelKind::RBF;
    k.gamma = gamma;
    return k;
}

KernelSpec KernelSpec::mahalanobis(const Matrix& m, double gamma) {
    if (!(gamma > 0.0)) throw Error(ErrorCode::NonPositiveGamma, "kernel gamma must be positive");
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error(ErrorCode::NonPSDMatrix, "metric must be a non-empty square matrix");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw Error(ErrorCode::NonPSDMatrix, "metric must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const Vector ev = es.eigenvalues();
    if (ev.minCoeff() < -1e-12 * scale) {
        throw Error(ErrorCode::NonPSDMatrix, "metric has a negative eigenvalue");
    }
    KernelSpec k;
    k.kind = KernelKind::Mahalanobis;
    k.gamma = gamma;
    k.metric = m;
    k.transform_ = ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    return k;
}

double KernelSpec::sq_distance(PointView a, PointView b) const {
    const RowVector d = a - b;
    if (kind == KernelKind::Mahalanobis) return d * metric * d.transpose();
    return d.squaredNorm();
}

double KernelSpec::operator()(PointView a, PointView b) const {
    if (kind == KernelKind::Linear) return a.dot(b);
    return std::exp(-gamma * sq_distance(a, b));
}

KernelSpec KernelSpec::with_gamma(double g) const {
    if (kind == KernelKind::Linear) return *this;
    if (!(g > 0.0)) throw Error(ErrorCode::NonPositiveGamma, "kernel gamma must be positive");
    KernelSpec k = *this;
    k.gamma = g;
    return k;
}

Matrix KernelSpec::transform(const Matrix& x) const {
    if (kind == KernelKind::Mahalanobis) return x * transform_.transpose();
    return x;
}

Matrix pairwise_sq_distances(const KernelSpec& k, const Matrix& a, const Matrix& b) {
    const Matrix ta = k.transform(a);
    const Matrix tb = k.transform(b);
    const Vector na = ta.rowwise().squaredNorm();
    const Vector nb = tb.rowwise().squaredNorm();
    Matrix d = (-2.0 * ta * tb.transpose());
    d.colwise() += na;
    d.rowwise() += nb.transpose();
    return d.cwiseMax(0.0);
}

Matrix cross_gram(const KernelSpec& k, const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw Error(ErrorCode::DimensionMismatch, "kernel inputs differ in dimension");
    if (k.kind == KernelKind::Linear) return a * b.transpose();
    return (-k.gamma * pairwise_sq_distances(k, a, b).array()).exp().matrix();
}

Matrix gram(const KernelSpec& k, const Matrix& x) {
    Matrix g = cross_gram(k, x, x);
    if (k.has_constant_diagonal()) g.diagonal().setOnes();
    return 0.5 * (g + g.transpose());
}

}  // namespace anoscope
