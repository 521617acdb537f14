#include "anoscope/oneclass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "anoscope/eval.hpp"
#include "anoscope/stats.hpp"

namespace anoscope::oneclass {

// ---- MVE via FastMCD ----------------------------------------------------------

double MVEModel::score(PointView x) const { return stats::mahalanobis_sq(x, center, precision) - radius2; }

Vector MVEModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

namespace {

struct McdState {
    std::vector<Index> subset;
    RowVector mean;
    Matrix cov;
    double det = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
};

bool estimate(const Matrix& x, const std::vector<Index>& idx, RowVector& mean, Matrix& cov, double& det) {
    Matrix sub(static_cast<Index>(idx.size()), x.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) sub.row(static_cast<Index>(k)) = x.row(idx[k]);
    mean = stats::mean(sub);
    cov = stats::covariance_mle(sub, mean);
    det = cov.determinant();
    const double scale = std::pow(std::max(cov.trace() / static_cast<double>(cov.rows()), 1e-300),
                                  static_cast<double>(cov.rows()));
    return det > 1e-14 * scale;
}

// Indices of the h points closest to (mean, cov) in Mahalanobis distance.
std::vector<Index> closest(const Matrix& x, const RowVector& mean, const Matrix& cov, Index h) {
    const Matrix prec = cov.ldlt().solve(Matrix::Identity(cov.rows(), cov.cols()));
    std::vector<std::pair<double, Index>> d;
    d.reserve(static_cast<std::size_t>(x.rows()));
    for (Index i = 0; i < x.rows(); ++i) d.emplace_back(stats::mahalanobis_sq(x.row(i), mean, prec), i);
    std::stable_sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Index> out;
    for (Index k = 0; k < h; ++k) out.push_back(d[static_cast<std::size_t>(k)].second);
    std::sort(out.begin(), out.end());
    return out;
}

// C-steps from `state` until the determinant stops decreasing or `max_steps` is hit.
void c_steps(const Matrix& x, Index h, McdState& state, int max_steps) {
    for (int s = 0; s < max_steps; ++s) {
        auto next = closest(x, state.mean, state.cov, h);
        if (next == state.subset) break;
        RowVector mean;
        Matrix cov;
        double det = 0.0;
        const bool ok = estimate(x, next, mean, cov, det);
        if (det >= state.det) break;
        state.subset = std::move(next);
        state.mean = mean;
        state.cov = cov;
        state.det = det;
        state.trace.push_back(det);
        if (!ok) break;  // exact fit on a degenerate subset; cannot improve further
    }
}

}  // namespace

MVEModel fit_mve(const Dataset& train, const MVEOptions& opts) {
    const Index n = train.size();
    const Index dim = train.dim();
    if (!(opts.support_fraction > 0.5 && opts.support_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "support fraction must be in (0.5, 1]");
    }
    if (!(opts.contamination >= 0.0 && opts.contamination < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "contamination must be in [0, 1)");
    }
    const auto h = static_cast<Index>(std::ceil(opts.support_fraction * static_cast<double>(n) - 1e-9));
    if (h < dim + 1) throw Error(ErrorCode::TooFewSamples, "support size must be at least D + 1");
    const Matrix& x = train.rows;

    std::mt19937_64 rng(opts.seed);
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});

    McdState best;
    for (int start = 0; start < opts.n_starts; ++start) {
        std::vector<Index> perm = all;
        std::shuffle(perm.begin(), perm.end(), rng);
        // Grow a random (D+1)-subset until its covariance is non-singular.
        Index size = dim + 1;
        McdState st;
        bool ok = false;
        while (size <= n) {
            st.subset.assign(perm.begin(), perm.begin() + size);
            ok = estimate(x, st.subset, st.mean, st.cov, st.det);
            if (ok) break;
            ++size;
        }
        if (!ok) continue;
        st.det = std::numeric_limits<double>::infinity();
        st.subset.clear();
        st.trace.clear();
        // First C-step from the elemental start defines the h-subset.
        st.subset = closest(x, st.mean, st.cov, h);
        estimate(x, st.subset, st.mean, st.cov, st.det);
        st.trace.push_back(st.det);
        c_steps(x, h, st, opts.c_steps - 1);
        if (st.det < best.det) best = std::move(st);
    }
    if (!std::isfinite(best.det)) {
        // Every elemental start was singular (e.g. all points collinear):
        // fall back to the full-data estimate.
        best.subset = closest(x, stats::mean(x), stats::floor_covariance(stats::covariance_mle(x, stats::mean(x)), 1e-9), h);
        estimate(x, best.subset, best.mean, best.cov, best.det);
        best.trace.push_back(best.det);
    }
    c_steps(x, h, best, 100);

    MVEModel m;
    m.support_fraction = opts.support_fraction;
    m.center = best.mean;
    m.shape = stats::floor_covariance(best.cov, stats::jitter_floor(best.cov));
    m.precision = stats::factorize_covariance(m.shape).precision;
    m.support = best.subset;
    m.determinant_trace = best.trace;
    std::vector<double> d;
    for (Index i : m.support) d.push_back(stats::mahalanobis_sq(x.row(i), m.center, m.precision));
    m.radius2 = stats::quantile(std::move(d), 1.0 - opts.contamination);
    return m;
}

// ---- SMO dual solver ----------------------------------------------------------

DualSolution solve_simplex_box_qp(const Matrix& q, const Vector& p, double upper, const SolverOptions& opts) {
    const Index n = q.rows();
    if (n == 0 || q.cols() != n || p.size() != n) throw Error(ErrorCode::DimensionMismatch, "QP shape mismatch");
    if (!(upper > 0.0) || static_cast<double>(n) * upper < 1.0 - 1e-12) {
        throw Error(ErrorCode::InvalidArgument, "box upper bound too small for the simplex constraint");
    }
    const double tau = 1e-12;

    DualSolution sol;
    sol.alpha = Vector::Zero(n);
    double remaining = 1.0;
    for (Index i = 0; i < n && remaining > 0.0; ++i) {
        const double a = std::min(upper, remaining);
        sol.alpha(i) = a;
        remaining -= a;
    }
    Vector g = q * sol.alpha + p;

    long it = 0;
    double gap = 0.0;
    for (;; ++it) {
        // i: steepest feasible ascent direction among variables that can grow.
        Index i = -1;
        double gmax = -std::numeric_limits<double>::infinity();
        for (Index t = 0; t < n; ++t) {
            if (sol.alpha(t) < upper && -g(t) > gmax) {
                gmax = -g(t);
                i = t;
            }
        }
        Index j = -1;
        double gmin = std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        for (Index t = 0; t < n; ++t) {
            if (!(sol.alpha(t) > 0.0)) continue;
            gmin = std::min(gmin, -g(t));
            const double b = gmax + g(t);
            if (i >= 0 && b > 0.0) {
                double a = q(i, i) + q(t, t) - 2.0 * q(i, t);
                if (a <= 0.0) a = tau;
                const double obj = -(b * b) / a;
                if (obj < best) {
                    best = obj;
                    j = t;
                }
            }
        }
        gap = gmax - gmin;
        if (i < 0 || j < 0 || gap < opts.tolerance) break;
        if (it >= opts.max_iter) {
            throw Error(ErrorCode::SolverNotConverged, "SMO stopped after " + std::to_string(it) +
                                                           " iterations with KKT violation " + std::to_string(gap));
        }
        double a = q(i, i) + q(j, j) - 2.0 * q(i, j);
        if (a <= 0.0) a = tau;
        double delta = (gmax + g(j)) / a;
        delta = std::min({delta, upper - sol.alpha(i), sol.alpha(j)});
        sol.alpha(i) += delta;
        sol.alpha(j) -= delta;
        if (sol.alpha(j) < 1e-15 * upper) sol.alpha(j) = 0.0;
        if (sol.alpha(i) > upper) sol.alpha(i) = upper;
        g += delta * (q.col(i) - q.col(j));
    }
    sol.iterations = it;
    sol.kkt_gap = gap;
    sol.gradient = g;
    sol.objective = 0.5 * sol.alpha.dot(q * sol.alpha) + p.dot(sol.alpha);
    return sol;
}

// ---- SVDD / OC-SVM ------------------------------------------------------------

namespace {

void check_nu(double nu) {
    if (!(nu > 0.0 && nu <= 1.0)) throw Error(ErrorCode::InvalidNu, "nu must be in (0, 1]");
}

std::vector<Index> nonzero(const Vector& a) {
    std::vector<Index> out;
    for (Index i = 0; i < a.size(); ++i) {
        if (a(i) > 0.0) out.push_back(i);
    }
    return out;
}

// Averages `value` over free variables; falls back to the midpoint of the
// bounds implied by variables at 0 and at the upper bound.
double boundary_average(const Vector& alpha, double upper, const Vector& value, bool at_upper_means_above) {
    const double eps = 1e-7 * upper;
    double sum = 0.0;
    Index free = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < alpha.size(); ++i) {
        if (alpha(i) > eps && alpha(i) < upper - eps) {
            sum += value(i);
            ++free;
        } else if (alpha(i) >= upper - eps) {
            // Outside the boundary: the threshold is at most (or least) this value.
            if (at_upper_means_above) hi = std::min(hi, value(i));
            else lo = std::max(lo, value(i));
        } else {
            if (at_upper_means_above) lo = std::max(lo, value(i));
            else hi = std::min(hi, value(i));
        }
    }
    if (free > 0) return sum / static_cast<double>(free);
    if (!std::isfinite(lo)) return hi;
    if (!std::isfinite(hi)) return lo;
    return 0.5 * (lo + hi);
}

}  // namespace

double SVDDModel::sq_distance_to_center(PointView x) const {
    double cross = 0.0;
    for (Index i : support_indices) cross += alphas(i) * kernel(x, training_points.row(i));
    return kernel(x, x) - 2.0 * cross + center_norm2;
}

double SVDDModel::score(PointView x) const { return sq_distance_to_center(x) - radius2; }

Vector SVDDModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

double OCSVMModel::score(PointView x) const {
    double s = 0.0;
    for (Index i : support_indices) s += alphas(i) * kernel(x, training_points.row(i));
    return rho - s;
}

Vector OCSVMModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

SVDDModel fit_svdd_gram(const Matrix& train, const Matrix& k, const KernelSpec& kernel, double nu,
                        const SolverOptions& opts) {
    check_nu(nu);
    const Index n = train.rows();
    const double upper = 1.0 / (nu * static_cast<double>(n));
    Matrix kj = k;
    kj.diagonal().array() += 1e-10;
    // Dual: max sum a_i k_ii - a^T K a, halved to 1/2 a^T K a - 1/2 diag(K)^T a.
    // With a constant diagonal the linear term is constant on the simplex and
    // drops out, leaving exactly the OC-SVM dual.
    const Vector p = kernel.has_constant_diagonal() ? Vector::Zero(n) : Vector(-0.5 * k.diagonal());
    const auto sol = solve_simplex_box_qp(kj, p, upper, opts);

    SVDDModel m;
    m.training_points = train;
    m.alphas = sol.alpha;
    m.kernel = kernel;
    m.nu = nu;
    m.iterations = sol.iterations;
    m.support_indices = nonzero(sol.alpha);
    m.center_norm2 = sol.alpha.dot(k * sol.alpha);
    const Vector dist2 = (k.diagonal() - 2.0 * (k * sol.alpha)).array() + m.center_norm2;
    m.radius2 = std::max(0.0, boundary_average(sol.alpha, upper, dist2, true));
    return m;
}

OCSVMModel fit_ocsvm_gram(const Matrix& train, const Matrix& k, const KernelSpec& kernel, double nu,
                          const SolverOptions& opts) {
    check_nu(nu);
    const Index n = train.rows();
    const double upper = 1.0 / (nu * static_cast<double>(n));
    Matrix kj = k;
    kj.diagonal().array() += 1e-10;
    const auto sol = solve_simplex_box_qp(kj, Vector::Zero(n), upper, opts);

    OCSVMModel m;
    m.training_points = train;
    m.alphas = sol.alpha;
    m.kernel = kernel;
    m.nu = nu;
    m.iterations = sol.iterations;
    m.support_indices = nonzero(sol.alpha);
    const Vector decision = k * sol.alpha;
    // Points at the upper bound lie outside the margin: decision <= rho.
    m.rho = boundary_average(sol.alpha, upper, decision, false);
    return m;
}

SVDDModel fit_svdd(const Dataset& train, const KernelSpec& kernel, double nu, const SolverOptions& opts) {
    check_nu(nu);
    return fit_svdd_gram(train.rows, gram(kernel, train.rows), kernel, nu, opts);
}

OCSVMModel fit_ocsvm(const Dataset& train, const KernelSpec& kernel, double nu, const SolverOptions& opts) {
    check_nu(nu);
    return fit_ocsvm_gram(train.rows, gram(kernel, train.rows), kernel, nu, opts);
}

// ---- Semi-supervised SVDD -------------------------------------------------------

double SemiSupervisedSVDDModel::score(PointView x) const {
    double cross = 0.0;
    for (Index i = 0; i < beta.size(); ++i) {
        if (beta(i) != 0.0) cross += beta(i) * kernel(x, expansion_points.row(i));
    }
    return kernel(x, x) - 2.0 * cross + center_norm2 - radius2;
}

Vector SemiSupervisedSVDDModel::score_batch(const Matrix& x) const {
    Vector out(x.rows());
    stats::parallel_for(x.rows(), [&](Index i) { out(i) = score(x.row(i)); });
    return out;
}

SemiSupervisedSVDDModel fit_semisupervised_svdd(const Dataset& train, const KernelSpec& kernel,
                                                const SemiSupervisedSVDDOptions& opts) {
    check_nu(opts.nu);
    const Index total = train.size();
    std::vector<int> y(static_cast<std::size_t>(total));
    Index n_unlabeled = 0;
    for (Index i = 0; i < total; ++i) {
        y[static_cast<std::size_t>(i)] = label_sign(train.labels[static_cast<std::size_t>(i)]);
        if (y[static_cast<std::size_t>(i)] == 0) ++n_unlabeled;
    }
    if (n_unlabeled == 0) throw Error(ErrorCode::EmptyTrainingSet, "semi-supervised SVDD needs unlabeled rows");
    const Index n_labeled = total - n_unlabeled;
    const double a = 1.0 / (opts.nu * static_cast<double>(n_unlabeled));
    const double b = n_labeled > 0 ? opts.kappa / static_cast<double>(n_labeled) : 0.0;

    const Matrix k = gram(kernel, train.rows);
    Vector beta = Vector::Zero(total);
    for (Index i = 0; i < total; ++i) {
        if (y[static_cast<std::size_t>(i)] == 0) beta(i) = 1.0 / static_cast<double>(n_unlabeled);
    }

    SemiSupervisedSVDDModel m;
    m.expansion_points = train.rows;
    m.kernel = kernel;
    // Exact minimizer over R^2 of the convex piecewise-linear objective for fixed distances.
    auto optimal_r2 = [&](const Vector& d) {
        std::vector<std::pair<double, double>> breaks;  // (d_i, slope increment when R^2 passes d_i)
        double slope = 1.0;
        for (Index i = 0; i < total; ++i) {
            const int yi = y[static_cast<std::size_t>(i)];
            const double w = yi == 0 ? a : b;
            if (yi >= 0) slope -= w;
            breaks.emplace_back(d(i), w);
        }
        if (slope >= 0.0) return 0.0;
        std::sort(breaks.begin(), breaks.end());
        for (const auto& [pos, inc] : breaks) {
            slope += inc;
            if (slope >= 0.0) return std::max(0.0, pos);
        }
        return std::max(0.0, breaks.back().first);
    };

    // Subgradient steps do not decrease the objective monotonically; keep the best iterate.
    Vector best_beta = beta;
    double best_objective = std::numeric_limits<double>::infinity();
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        const Vector kb = k * beta;
        const double cn = beta.dot(kb);
        const Vector d = (k.diagonal() - 2.0 * kb).array() + cn;
        const double r2 = optimal_r2(d);

        double objective = r2;
        Vector omega = Vector::Zero(total);
        for (Index i = 0; i < total; ++i) {
            const int yi = y[static_cast<std::size_t>(i)];
            const double s = d(i) - r2;
            if (yi == 0) {
                objective += a * std::max(0.0, s);
                if (s > 0.0) omega(i) = a;
            } else {
                objective += b * std::max(0.0, yi * s);
                if (yi * s > 0.0) omega(i) = b * yi;
            }
        }
        m.objective_trace.push_back(objective);
        if (objective < best_objective) {
            best_objective = objective;
            best_beta = beta;
        }
        // Functional subgradient step on the center: c += 2 eta sum_i omega_i (phi_i - c).
        const double eta = opts.learning_rate / (1.0 + 0.01 * epoch);
        beta += 2.0 * eta * (omega - omega.sum() * beta);
    }
    m.beta = best_beta;
    m.center_norm2 = best_beta.dot(k * best_beta);
    const Vector d = (k.diagonal() - 2.0 * (k * best_beta)).array() + m.center_norm2;
    m.radius2 = optimal_r2(d);
    return m;
}

// ---- Loss and model selection ---------------------------------------------------

double one_class_hinge(double s, Label y, double nu) {
    switch (y) {
        case Label::Normal: return std::max(0.0, s) / (1.0 + nu);
        case Label::Anomaly: return nu * std::max(0.0, -s) / (1.0 + nu);
        case Label::Unlabeled: break;
    }
    throw Error(ErrorCode::UnlabeledInput, "hinge loss needs a Normal or Anomaly label");
}

double semisupervised_hinge(double s, Label y) {
    if (y == Label::Unlabeled) throw Error(ErrorCode::UnlabeledInput, "hinge loss needs a Normal or Anomaly label");
    return std::max(0.0, label_sign(y) * s);
}

std::vector<double> default_nu_grid() { return {0.01, 0.05, 0.1, 0.2}; }

GridSearchResult select_nu_and_gamma(const Dataset& train, const Dataset& val, const std::vector<double>& nus,
                                     const std::vector<double>& gammas, OneClassMethod method, const KernelSpec& base) {
    const Dataset labeled = val.labeled_only();
    if (labeled.count(Label::Anomaly) == 0 || labeled.count(Label::Normal) == 0) {
        throw Error(ErrorCode::NoLabeledValidation, "validation set needs labeled normals and anomalies");
    }
    if (nus.empty() || gammas.empty()) throw Error(ErrorCode::InvalidArgument, "empty hyperparameter grid");

    GridSearchResult res;
    res.val_auroc = -1.0;
    for (double g : gammas) {
        const KernelSpec kernel = base.with_gamma(g);
        const Matrix k = gram(kernel, train.rows);
        for (double nu : nus) {
            Vector scores;
            if (method == OneClassMethod::SVDD) {
                scores = fit_svdd_gram(train.rows, k, kernel, nu).score_batch(labeled.rows);
            } else {
                scores = fit_ocsvm_gram(train.rows, k, kernel, nu).score_batch(labeled.rows);
            }
            const double auc = eval::auroc(eval::LabeledScores::from(scores, labeled.labels));
            res.cells.push_back({nu, g, auc});
            const bool better = auc > res.val_auroc || (auc == res.val_auroc && g > res.gamma);
            if (better) {
                res.val_auroc = auc;
                res.nu = nu;
                res.gamma = g;
            }
        }
    }
    return res;
}

}  // namespace anoscope::oneclass
