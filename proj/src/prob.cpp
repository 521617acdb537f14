#include "anoscope/prob.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "anoscope/recon.hpp"
#include "anoscope/stats.hpp"

namespace anoscope::prob {

// ---- Gaussian ---------------------------------------------------------------

double GaussianModel::score(PointView x) const { return stats::mahalanobis_sq(x, mean, precision); }

Vector GaussianModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

double GaussianModel::nll(PointView x) const {
    return -stats::gaussian_log_pdf(x, mean, stats::GaussianFactor{precision, log_det});
}

GaussianModel fit_gaussian(const Dataset& train) {
    if (train.size() < 2) throw Error(ErrorCode::TooFewSamples, "Gaussian fit needs at least two samples");
    GaussianModel m;
    m.mean = stats::mean(train.rows);
    const Matrix s = stats::covariance_mle(train.rows, m.mean);
    m.covariance = stats::floor_covariance(s, stats::jitter_floor(s));
    const auto f = stats::factorize_covariance(m.covariance);
    m.precision = f.precision;
    m.log_det = f.log_det;
    return m;
}

// ---- GMM --------------------------------------------------------------------

void refresh_gmm_cache(GMMModel& m) {
    m.precisions.clear();
    m.log_dets.clear();
    for (const auto& c : m.covariances) {
        const auto f = stats::factorize_covariance(c);
        m.precisions.push_back(f.precision);
        m.log_dets.push_back(f.log_det);
    }
}

namespace {

// Row i: log pi_k + log N(x_i; mu_k, Sigma_k).
Matrix component_log_densities(const GMMModel& m, const Matrix& x) {
    Matrix out(x.rows(), m.k());
    for (Index c = 0; c < m.k(); ++c) {
        const stats::GaussianFactor f{m.precisions[static_cast<std::size_t>(c)], m.log_dets[static_cast<std::size_t>(c)]};
        const double lw = std::log(m.weights(c));
        for (Index i = 0; i < x.rows(); ++i) {
            out(i, c) = lw + stats::gaussian_log_pdf(x.row(i), m.means[static_cast<std::size_t>(c)], f);
        }
    }
    return out;
}

}  // namespace

double GMMModel::score(PointView x) const {
    Vector l(k());
    for (Index c = 0; c < k(); ++c) {
        const stats::GaussianFactor f{precisions[static_cast<std::size_t>(c)], log_dets[static_cast<std::size_t>(c)]};
        l(c) = std::log(weights(c)) + stats::gaussian_log_pdf(x, means[static_cast<std::size_t>(c)], f);
    }
    return -stats::log_sum_exp(l);
}

Vector GMMModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

GMMModel fit_gmm(const Dataset& train, const GMMOptions& opts) {
    const Index n = train.size();
    const Index k = opts.k;
    if (k < 1 || n < k) throw Error(ErrorCode::InvalidArgument, "GMM needs 1 <= K <= n");
    if (n < 2) throw Error(ErrorCode::TooFewSamples, "GMM needs at least two samples");
    const Matrix& x = train.rows;
    const RowVector global_mean = stats::mean(x);
    const Matrix global_cov = stats::covariance_mle(x, global_mean);
    // Components collapsing onto single points are held open by this floor.
    const double floor = stats::jitter_floor(global_cov);

    GMMModel m;
    m.weights = Vector::Constant(k, 1.0 / static_cast<double>(k));
    std::mt19937_64 rng(opts.seed);
    const auto seeds = recon::kmeanspp_seed(x, k, rng);
    const Matrix init_cov = stats::floor_covariance(global_cov, floor);
    for (Index c = 0; c < k; ++c) {
        m.means.push_back(x.row(seeds[static_cast<std::size_t>(c)]));
        m.covariances.push_back(init_cov);
    }
    refresh_gmm_cache(m);

    double prev = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.max_iter; ++it) {
        // E-step
        const Matrix logp = component_log_densities(m, x);
        Matrix resp(n, k);
        double ll = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double lse = stats::log_sum_exp(logp.row(i).transpose());
            ll += lse;
            resp.row(i) = (logp.row(i).array() - lse).exp();
        }
        ll /= static_cast<double>(n);
        m.log_likelihood_trace.push_back(ll);
        if (it > 0 && ll - prev < opts.tol) break;
        prev = ll;

        // M-step
        const Vector nk = resp.colwise().sum().transpose();
        for (Index c = 0; c < k; ++c) {
            const auto cs = static_cast<std::size_t>(c);
            if (nk(c) <= std::numeric_limits<double>::min()) {
                // Empty component: keep its mean, reset to the global shape.
                m.covariances[cs] = init_cov;
                m.weights(c) = std::numeric_limits<double>::min();
                continue;
            }
            m.weights(c) = nk(c) / static_cast<double>(n);
            m.means[cs] = (resp.col(c).transpose() * x) / nk(c);
            m.covariances[cs] = stats::floor_covariance(stats::weighted_covariance(x, resp.col(c), m.means[cs]), floor);
        }
        m.weights /= m.weights.sum();
        refresh_gmm_cache(m);
    }
    return m;
}

// ---- KDE --------------------------------------------------------------------

double KDEModel::score(PointView x) const {
    const Index n = training_points.rows();
    Vector e(n);
    for (Index i = 0; i < n; ++i) e(i) = -kernel.gamma * kernel.sq_distance(x, training_points.row(i));
    return -(stats::log_sum_exp(e) - std::log(static_cast<double>(n)));
}

Vector KDEModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

double KDEModel::log_density(PointView x) const {
    // Normalizer of exp(-gamma d_M^2): (gamma / pi)^{D/2} sqrt(det M).
    const double dim = static_cast<double>(training_points.cols());
    double log_norm = 0.5 * dim * std::log(kernel.gamma / std::numbers::pi);
    if (kernel.kind == KernelKind::Mahalanobis) {
        log_norm += 0.5 * std::log(std::max(kernel.metric.determinant(), std::numeric_limits<double>::min()));
    }
    return log_norm - score(x);
}

KDEModel fit_kde(const Dataset& train, const KernelSpec& kernel) {
    if (train.size() < 1) throw Error(ErrorCode::EmptyTrainingSet, "KDE needs at least one sample");
    if (kernel.kind == KernelKind::Linear) {
        throw Error(ErrorCode::InvalidArgument, "KDE requires an RBF or Mahalanobis kernel");
    }
    if (!(kernel.gamma > 0.0)) throw Error(ErrorCode::NonPositiveGamma, "KDE gamma must be positive");
    if (kernel.kind == KernelKind::Mahalanobis && kernel.metric.rows() != train.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "metric dimension differs from data");
    }
    return KDEModel{train.rows, kernel};
}

KDEModel fit_kde(const Dataset& train, double gamma) {
    if (!(gamma > 0.0)) throw Error(ErrorCode::NonPositiveGamma, "KDE gamma must be positive");
    return fit_kde(train, KernelSpec::rbf(gamma));
}

std::vector<double> gamma_grid(Index dim) {
    std::vector<double> g;
    for (int i = -5; i <= 5; ++i) g.push_back(1.0 / (std::ldexp(1.0, i) * static_cast<double>(dim)));
    return g;
}

double select_bandwidth(const Dataset& train, const Dataset& holdout, const std::vector<double>& grid) {
    if (holdout.size() == 0) throw Error(ErrorCode::InvalidArgument, "bandwidth selection needs a hold-out set");
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty gamma grid");
    double best_gamma = grid.front();
    double best_ll = -std::numeric_limits<double>::infinity();
    for (double g : grid) {
        const KDEModel m = fit_kde(train, g);
        double ll = 0.0;
        for (Index i = 0; i < holdout.size(); ++i) ll += m.log_density(holdout.rows.row(i));
        ll /= static_cast<double>(holdout.size());
        if (ll > best_ll) {
            best_ll = ll;
            best_gamma = g;
        }
    }
    return best_gamma;
}

double select_bandwidth(const Dataset& train, const Dataset& holdout) {
    return select_bandwidth(train, holdout, gamma_grid(train.dim()));
}

// ---- Probabilistic PCA ------------------------------------------------------

Matrix PPCAModel::model_covariance() const {
    Matrix c = loadings * loadings.transpose();
    c.diagonal().array() += sigma2;
    return c;
}

double PPCAModel::score(PointView x) const {
    return -stats::gaussian_log_pdf(x, mean, stats::GaussianFactor{precision, log_det});
}

Vector PPCAModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

PPCAModel fit_ppca(const Dataset& train, Index d) {
    const Index dim = train.dim();
    if (train.size() < 2) throw Error(ErrorCode::TooFewSamples, "pPCA needs at least two samples");
    if (d < 1 || d >= dim) throw Error(ErrorCode::InvalidArgument, "pPCA needs 1 <= d < D");
    PPCAModel m;
    m.mean = stats::mean(train.rows);
    const auto eig = stats::eigen_descending(stats::covariance_mle(train.rows, m.mean));
    const double scale = std::max(1.0, std::abs(eig.values(0)));
    Index positive = 0;
    for (Index j = 0; j < dim; ++j) {
        if (eig.values(j) > 1e-12 * scale) ++positive;
    }
    if (positive < d) throw Error(ErrorCode::RankDeficient, "fewer positive eigenvalues than latent dimensions");

    m.sigma2 = eig.values.tail(dim - d).mean();
    if (!(m.sigma2 > 0.0)) m.sigma2 = stats::jitter_floor(Matrix(eig.values.asDiagonal()));
    const Vector top = (eig.values.head(d).array() - m.sigma2).cwiseMax(0.0).sqrt();
    m.loadings = eig.vectors.leftCols(d) * top.asDiagonal();

    // Closed-form inverse and log-determinant from the eigenbasis.
    Vector model_ev = Vector::Constant(dim, m.sigma2);
    model_ev.head(d) = eig.values.head(d).cwiseMax(m.sigma2);
    m.precision = eig.vectors * model_ev.cwiseInverse().asDiagonal() * eig.vectors.transpose();
    m.precision = 0.5 * (m.precision + m.precision.transpose());
    m.log_det = model_ev.array().log().sum();
    return m;
}

}  // namespace anoscope::prob
