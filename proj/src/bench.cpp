#include "anoscope/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "anoscope/deep.hpp"
#include "anoscope/explain.hpp"
#include "anoscope/oneclass.hpp"
#include "anoscope/prob.hpp"
#include "anoscope/recon.hpp"

namespace anoscope::bench {

const MethodResult& ToyBenchResult::at(const std::string& method) const {
    for (const auto& r : rows) {
        if (r.method == method) return r;
    }
    throw Error(ErrorCode::InvalidArgument, "no benchmark row for '" + method + "'");
}

namespace {

std::string fmt(const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.6g", key, v);
    return buf;
}

Dataset relabel(Dataset d, Label l) {
    std::fill(d.labels.begin(), d.labels.end(), l);
    return d;
}

// Random (fit, holdout) partition with `holdout` rows held out.
std::pair<Dataset, Dataset> shuffle_split(const Dataset& d, Index holdout, std::uint64_t seed) {
    std::vector<Index> idx(static_cast<std::size_t>(d.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<Index> hold(idx.begin(), idx.begin() + holdout);
    std::vector<Index> fit(idx.begin() + holdout, idx.end());
    std::sort(hold.begin(), hold.end());
    std::sort(fit.begin(), fit.end());
    return {d.subset(fit), d.subset(hold)};
}

}  // namespace

ToyBenchResult run_toy_benchmark(const ToyBenchConfig& cfg) {
    const std::uint64_t s = cfg.seed;
    data::TwoMoonsConfig moons;
    moons.n_train = cfg.n_train;
    moons.seed = s;
    const Dataset train = data::gen_two_moons(moons);

    moons.n_train = cfg.n_test_normal;
    moons.seed = s + 1;
    const Dataset test = concat(relabel(data::gen_two_moons(moons), Label::Normal),
                                data::sample_uniform_anomalies(data::two_moons_box(), cfg.n_test_anomaly, s + 2));
    moons.n_train = cfg.n_val_normal;
    moons.seed = s + 3;
    const Dataset val = concat(relabel(data::gen_two_moons(moons), Label::Normal),
                               data::sample_uniform_anomalies(data::two_moons_box(), cfg.n_val_anomaly, s + 4));

    ToyBenchResult result;
    auto record = [&](const std::string& method, const Vector& scores, std::string params = {}) {
        const auto ls = eval::LabeledScores::from(scores, test.labels);
        result.rows.push_back({method, eval::auroc(ls), eval::average_precision(ls), std::move(params)});
    };

    record("gaussian", prob::fit_gaussian(train).score_batch(test.rows));
    record("gmm", prob::fit_gmm(train, prob::GMMOptions{2, s}).score_batch(test.rows), "k=2");
    {
        const auto [fit_part, hold] = shuffle_split(train, train.size() / 10, s + 5);
        const double g = prob::select_bandwidth(fit_part, hold);
        record("kde", prob::fit_kde(train, g).score_batch(test.rows), fmt("gamma", g));
    }
    record("ppca", prob::fit_ppca(train, 1).score_batch(test.rows), "d=1");
    {
        oneclass::MVEOptions o;
        o.seed = s;
        record("mve", oneclass::fit_mve(train, o).score_batch(test.rows), fmt("support_fraction", o.support_fraction));
    }
    const auto gammas = prob::gamma_grid(train.dim());
    for (const auto method : {oneclass::OneClassMethod::SVDD, oneclass::OneClassMethod::OCSVM}) {
        const auto sel = oneclass::select_nu_and_gamma(train, val, oneclass::default_nu_grid(), gammas, method);
        const KernelSpec k = KernelSpec::rbf(sel.gamma);
        const Vector scores = method == oneclass::OneClassMethod::SVDD ? oneclass::fit_svdd(train, k, sel.nu).score_batch(test.rows)
                                                                      : oneclass::fit_ocsvm(train, k, sel.nu).score_batch(test.rows);
        record(method == oneclass::OneClassMethod::SVDD ? "svdd" : "ocsvm", scores,
               fmt("nu", sel.nu) + ";" + fmt("gamma", sel.gamma));
    }
    record("pca", recon::fit_pca_components(train, 1).score_batch(test.rows), "d=1");
    {
        const double g = recon::kpca_gamma_heuristic(train);
        record("kpca", recon::fit_kpca(train, KernelSpec::rbf(g), 0.9).score_batch(test.rows),
               fmt("gamma", g) + ";variance_fraction=0.9");
    }
    record("vq", recon::fit_vq(train, 10, recon::VQNorm::L2, s).score_batch(test.rows), "k=10");

    if (cfg.include_deep) {
        deep::OptimizerSpec opt;
        opt.learning_rate = 3e-3;
        opt.batch_size = 64;
        opt.epochs = 150;
        opt.seed = s;
        {
            deep::MLPSpec enc{{2, 32, 32, 1}, deep::Activation::ELU, true, s};
            const auto [fit_part, hold] = shuffle_split(train, train.size() / 10, s + 6);
            record("ae", deep::fit_autoencoder(fit_part, enc, opt, hold).score_batch(test.rows), "layers=2-32-32-1");
        }
        {
            deep::MLPSpec net{{2, 32, 32, 8}, deep::Activation::ELU, false, s};
            deep::OptimizerSpec o = opt;
            o.learning_rate = 1e-3;
            o.weight_decay = 1e-5;
            record("dsvdd", deep::fit_deep_svdd(train, net, o, deep::DeepSVDDOptions{}).score_batch(test.rows),
                   "layers=2-32-32-8");
        }
    }
    return result;
}

void write_toy_table(std::ostream& out, const ToyBenchResult& result) {
    out << "method,auroc,ap,params\n";
    char buf[64];
    for (const auto& r : result.rows) {
        out << r.method;
        std::snprintf(buf, sizeof buf, ",%.17g", r.auroc);
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", r.ap);
        out << buf << ',' << r.params << '\n';
    }
}

ThyroidResult run_thyroid_pipeline(const Dataset& data, const ThyroidConfig& cfg) {
    data.validate();
    const data::Split split = data::stratified_split(data, {0.6, 0.1, 0.3}, cfg.seed);
    Dataset train = split.train;
    Dataset val = split.val;
    Dataset test = split.test;
    if (cfg.robust_scaling) {
        const auto scaler = data::fit_robust_scaler(train);
        train = data::apply_scaler(scaler, train);
        val = data::apply_scaler(scaler, val);
        test = data::apply_scaler(scaler, test);
    }
    // Training labels stay unused: anomalies in the training split act as contamination.
    std::fill(train.labels.begin(), train.labels.end(), Label::Unlabeled);

    const auto grid = prob::gamma_grid(train.dim());
    const auto sel = oneclass::select_nu_and_gamma(train, val, {cfg.nu}, grid, oneclass::OneClassMethod::OCSVM);
    ThyroidResult r;
    r.gamma = sel.gamma;
    r.grid_size = grid.size();
    r.gamma_index = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), sel.gamma) - grid.begin());
    r.at_grid_edge = r.gamma_index == 0 || r.gamma_index + 1 == grid.size();
    r.val_auroc = sel.val_auroc;

    const auto model = oneclass::fit_ocsvm(train, KernelSpec::rbf(sel.gamma), cfg.nu);
    const auto ls = eval::LabeledScores::from(model.score_batch(test.rows), test.labels);
    r.test = eval::evaluate(ls, {10, 50, 100}, core::DecisionThreshold{0.0, cfg.nu});
    return r;
}

NuisanceFixture planted_nuisance_fixture(std::uint64_t seed) {
    constexpr Index dim = 6;
    constexpr Index n_train = 400;
    constexpr Index n_probe = 60;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    NuisanceFixture f;
    f.nuisance = dim - 1;
    f.mask = Vector::Zero(dim);
    f.mask(0) = 1.0;
    f.mask(1) = 1.0;

    Matrix x(n_train, dim);
    for (Index i = 0; i < n_train; ++i) {
        for (Index d = 0; d < dim; ++d) x(i, d) = g(rng);
    }
    f.train = Dataset::uniform(std::move(x), Label::Normal);

    // True cause: a shift on features 0 and 1. The nuisance feature shifts
    // further with the label but carries no anomaly semantics.
    Matrix p(n_probe, dim);
    for (Index i = 0; i < n_probe; ++i) {
        for (Index d = 0; d < dim; ++d) p(i, d) = g(rng);
        p(i, 0) += 3.0;
        p(i, 1) -= 3.0;
        p(i, f.nuisance) += 6.0;
    }
    f.probes = Dataset::uniform(std::move(p), Label::Anomaly);
    return f;
}

CleverHansResult clever_hans_comparison(const NuisanceFixture& fixture, double gamma, double damping) {
    const Index dim = fixture.train.dim();
    Matrix m = Matrix::Identity(dim, dim);
    m(fixture.nuisance, fixture.nuisance) = damping;
    const auto rbf = prob::fit_kde(fixture.train, gamma);
    const auto maha = prob::fit_kde(fixture.train, explain::mahalanobis_kernel(m, gamma));

    CleverHansResult r;
    const auto hr = explain::lrp_heatmaps(rbf, fixture.probes.rows);
    const auto hm = explain::lrp_heatmaps(maha, fixture.probes.rows);
    for (std::size_t i = 0; i < hr.size(); ++i) {
        r.rbf_accuracy += explain::explanation_accuracy(hr[i], fixture.mask);
        r.mahalanobis_accuracy += explain::explanation_accuracy(hm[i], fixture.mask);
    }
    r.rbf_accuracy /= static_cast<double>(hr.size());
    r.mahalanobis_accuracy /= static_cast<double>(hm.size());
    return r;
}

}  // namespace anoscope::bench
