#include "anoscope/recon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "anoscope/stats.hpp"

namespace anoscope::recon {

namespace {

// Smallest d whose leading eigenvalues reach `fraction` of the positive total.
Index components_for_fraction(const Vector& eigenvalues, double fraction) {
    const Vector pos = eigenvalues.cwiseMax(0.0);
    const double total = pos.sum();
    if (!(total > 0.0)) return 0;
    double acc = 0.0;
    for (Index j = 0; j < pos.size(); ++j) {
        acc += pos(j);
        if (acc >= fraction * total - 1e-12 * total) return j + 1;
    }
    return pos.size();
}

}  // namespace

Matrix PCAModel::projector() const { return components.transpose() * components; }

double PCAModel::score(PointView x) const {
    const RowVector c = x - mean;
    const RowVector coords = c * components.transpose();
    const RowVector residual = c - coords * components;
    return residual.squaredNorm();
}

Vector PCAModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

PCAModel fit_pca_components(const Dataset& train, Index d) {
    if (train.size() < 2) throw Error(ErrorCode::TooFewSamples, "PCA needs at least two samples");
    if (d < 0 || d > train.dim()) throw Error(ErrorCode::InvalidArgument, "component count out of range");
    PCAModel m;
    m.mean = stats::mean(train.rows);
    const auto eig = stats::eigen_descending(stats::covariance_mle(train.rows, m.mean));
    m.components = eig.vectors.leftCols(d).transpose();
    m.explained_variance = eig.values.head(d);
    const double total = eig.values.cwiseMax(0.0).sum();
    m.variance_fraction = total > 0 ? m.explained_variance.cwiseMax(0.0).sum() / total : 1.0;
    return m;
}

PCAModel fit_pca(const Dataset& train, double variance_fraction) {
    if (train.size() < 2) throw Error(ErrorCode::TooFewSamples, "PCA needs at least two samples");
    if (!(variance_fraction > 0.0 && variance_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "variance fraction must be in (0, 1]");
    }
    const RowVector mu = stats::mean(train.rows);
    const auto eig = stats::eigen_descending(stats::covariance_mle(train.rows, mu));
    return fit_pca_components(train, components_for_fraction(eig.values, variance_fraction));
}

double KPCAModel::score(PointView x) const {
    const Index n = training_points.rows();
    Vector kx(n);
    for (Index i = 0; i < n; ++i) kx(i) = kernel(x, training_points.row(i));
    const double kx_mean = kx.mean();
    const Vector centered = (kx.array() - kx_mean - kernel_row_means.array() + grand_mean).matrix();
    const double self = kernel(x, x) - 2.0 * kx_mean + grand_mean;
    const Vector proj = coefficients.transpose() * centered;
    return std::max(0.0, self - proj.squaredNorm());
}

Vector KPCAModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

double kpca_score(const KPCAModel& model, PointView x) { return model.score(x); }

KPCAModel fit_kpca(const Dataset& train, const KernelSpec& kernel, double variance_fraction) {
    const Index n = train.size();
    if (n < 2) throw Error(ErrorCode::TooFewSamples, "kernel PCA needs at least two samples");
    if (!(variance_fraction > 0.0 && variance_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "variance fraction must be in (0, 1]");
    }
    KPCAModel m;
    m.training_points = train.rows;
    m.kernel = kernel;
    const Matrix k = gram(kernel, train.rows);
    m.kernel_row_means = k.rowwise().mean();
    m.grand_mean = m.kernel_row_means.mean();

    Matrix kc = k;
    kc.colwise() -= m.kernel_row_means;
    kc.rowwise() -= m.kernel_row_means.transpose();
    kc.array() += m.grand_mean;
    kc = 0.5 * (kc + kc.transpose());

    auto eig = stats::eigen_descending(kc);
    const double scale = std::max(1.0, std::abs(eig.values(0)));
    if (eig.values.minCoeff() < -1e-8 * scale) {
        kc.diagonal().array() += 1e-10;
        eig = stats::eigen_descending(kc);
        if (eig.values.minCoeff() < -1e-8 * scale) {
            throw Error(ErrorCode::NonPSDKernelMatrix, "centered kernel matrix has negative eigenvalues");
        }
    }
    // Directions with numerically zero variance carry no reconstruction.
    Index rank = 0;
    while (rank < n && eig.values(rank) > 1e-12 * scale) ++rank;
    const Index d = std::min(rank, components_for_fraction(eig.values, variance_fraction));
    m.eigenvalues = eig.values.head(d);
    m.coefficients = eig.vectors.leftCols(d);
    for (Index j = 0; j < d; ++j) m.coefficients.col(j) /= std::sqrt(eig.values(j));
    const double total = eig.values.cwiseMax(0.0).sum();
    m.variance_fraction = total > 0 ? m.eigenvalues.sum() / total : 1.0;
    return m;
}

double kpca_gamma_heuristic(const Dataset& train) {
    const Index n = train.size();
    if (n < 2) throw Error(ErrorCode::TooFewSamples, "need two points for a neighbor scale");
    const Matrix d2 = pairwise_sq_distances(KernelSpec::rbf(1.0), train.rows, train.rows);
    std::vector<double> off;
    off.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) off.push_back(d2(i, j));
    }
    const double med = stats::median(std::move(off));
    if (!(med > 0.0)) throw Error(ErrorCode::InvalidArgument, "all training points coincide");
    return std::numbers::ln2 / med;
}

namespace {

double vq_distance(PointView a, PointView b, VQNorm norm) {
    if (norm == VQNorm::L2) return (a - b).squaredNorm();
    return (a - b).lpNorm<1>();
}

}  // namespace

Index VQModel::nearest(PointView x) const {
    Index best = 0;
    double best_d = vq_distance(x, prototypes.row(0), norm);
    for (Index c = 1; c < prototypes.rows(); ++c) {
        const double d = vq_distance(x, prototypes.row(c), norm);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

double VQModel::score(PointView x) const { return vq_distance(x, prototypes.row(nearest(x)), norm); }

Vector VQModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

std::vector<Index> kmeanspp_seed(const Matrix& x, Index k, std::mt19937_64& rng) {
    const Index n = x.rows();
    std::vector<Index> chosen;
    std::uniform_int_distribution<Index> first(0, n - 1);
    chosen.push_back(first(rng));
    Vector d2 = (x.rowwise() - x.row(chosen[0])).rowwise().squaredNorm();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    while (static_cast<Index>(chosen.size()) < k) {
        const double total = d2.sum();
        Index pick = 0;
        if (total > 0.0) {
            const double r = u(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (acc > r) {
                    pick = i;
                    break;
                }
            }
        } else {
            // All remaining points coincide with a chosen center.
            pick = static_cast<Index>(chosen.size()) % n;
        }
        chosen.push_back(pick);
        d2 = d2.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
    }
    return chosen;
}

VQModel fit_vq(const Dataset& train, Index k, VQNorm norm, std::uint64_t seed, int max_iter) {
    const Index n = train.size();
    if (k < 1 || n < k) throw Error(ErrorCode::InvalidArgument, "VQ needs 1 <= K <= n");
    const Matrix& x = train.rows;
    std::mt19937_64 rng(seed);
    VQModel m;
    m.norm = norm;
    m.prototypes.resize(k, x.cols());
    const auto init = kmeanspp_seed(x, k, rng);
    for (Index c = 0; c < k; ++c) m.prototypes.row(c) = x.row(init[static_cast<std::size_t>(c)]);

    std::vector<Index> assign(static_cast<std::size_t>(n), -1);
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        double objective = 0.0;
        for (Index i = 0; i < n; ++i) {
            const Index c = m.nearest(x.row(i));
            objective += vq_distance(x.row(i), m.prototypes.row(c), norm);
            if (assign[static_cast<std::size_t>(i)] != c) {
                assign[static_cast<std::size_t>(i)] = c;
                changed = true;
            }
        }
        m.objective_trace.push_back(objective / static_cast<double>(n));
        if (!changed && it > 0) break;

        for (Index c = 0; c < k; ++c) {
            std::vector<Index> members;
            for (Index i = 0; i < n; ++i) {
                if (assign[static_cast<std::size_t>(i)] == c) members.push_back(i);
            }
            if (members.empty()) {
                // Reseed from the point worst served by its prototype.
                Index far = 0;
                double far_d = -1.0;
                for (Index i = 0; i < n; ++i) {
                    const double d = vq_distance(x.row(i), m.prototypes.row(assign[static_cast<std::size_t>(i)]), norm);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                m.prototypes.row(c) = x.row(far);
                assign[static_cast<std::size_t>(far)] = c;
                continue;
            }
            if (norm == VQNorm::L2) {
                RowVector sum = RowVector::Zero(x.cols());
                for (Index i : members) sum += x.row(i);
                m.prototypes.row(c) = sum / static_cast<double>(members.size());
            } else {
                for (Index j = 0; j < x.cols(); ++j) {
                    std::vector<double> col;
                    col.reserve(members.size());
                    for (Index i : members) col.push_back(x(i, j));
                    m.prototypes(c, j) = stats::median(std::move(col));
                }
            }
        }
    }
    return m;
}

}  // namespace anoscope::recon
