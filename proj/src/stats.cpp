#include "anoscope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <thread>

namespace anoscope::stats {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty sample");
    q = std::clamp(q, 0.0, 1.0);
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, q);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double log_sum_exp(const Vector& v) {
    if (v.size() == 0) return -std::numeric_limits<double>::infinity();
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

RowVector mean(const Matrix& x) { return x.colwise().mean(); }

Matrix covariance_mle(const Matrix& x, const RowVector& mu) {
    const Matrix c = x.rowwise() - mu;
    return (c.transpose() * c) / static_cast<double>(x.rows());
}

Matrix weighted_covariance(const Matrix& x, const Vector& w, const RowVector& mu) {
    const Matrix c = x.rowwise() - mu;
    const Matrix s = c.transpose() * w.asDiagonal() * c;
    return s / w.sum();
}

SymmetricEigen eigen_descending(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const Index n = s.rows();
    SymmetricEigen out;
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    // Fix the sign so the largest-magnitude entry of each vector is positive.
    for (Index j = 0; j < n; ++j) {
        Index arg = 0;
        out.vectors.col(j).cwiseAbs().maxCoeff(&arg);
        if (out.vectors(arg, j) < 0) out.vectors.col(j) *= -1.0;
    }
    return out;
}

double jitter_floor(const Matrix& s) {
    const double t = s.trace() / static_cast<double>(s.rows());
    return t > 0 ? 1e-9 * t : 1e-12;
}

Matrix floor_covariance(const Matrix& s, double floor) {
    Matrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < floor) {
        sym.diagonal().array() += floor;
    }
    return sym;
}

GaussianFactor factorize_covariance(const Matrix& cov) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularCovariance, "covariance is not positive definite");
    }
    GaussianFactor f;
    const Matrix l = llt.matrixL();
    f.log_det = 2.0 * l.diagonal().array().log().sum();
    f.precision = llt.solve(Matrix::Identity(cov.rows(), cov.cols()));
    f.precision = 0.5 * (f.precision + f.precision.transpose());
    return f;
}

double mahalanobis_sq(PointView x, const RowVector& mu, const Matrix& precision) {
    const RowVector d = x - mu;
    return d * precision * d.transpose();
}

double gaussian_log_pdf(PointView x, const RowVector& mu, const GaussianFactor& f) {
    const double dim = static_cast<double>(mu.size());
    return -0.5 * (dim * std::log(2.0 * std::numbers::pi) + f.log_det +
                   mahalanobis_sq(x, mu, f.precision));
}

unsigned parallel_threads() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ANOSCOPE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return std::min(static_cast<unsigned>(v), hw);
    }
    return hw;
}

void parallel_for(Index n, const std::function<void(Index)>& body) {
    const unsigned threads = std::min<unsigned>(parallel_threads(), static_cast<unsigned>(std::max<Index>(n / 64, 1)));
    if (threads <= 1) {
        for (Index i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const Index chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const Index begin = static_cast<Index>(t) * chunk;
        const Index end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] {
            for (Index i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace anoscope::stats
