#include <gtest/gtest.h>

#include <cmath>

#include "anoscope/data.hpp"
#include "anoscope/deep.hpp"
#include "helpers.hpp"

using namespace anoscope;
using namespace anoscope::deep;

namespace {

double relative_error(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

// Loss L = sum(G .* f(x)), so dL/df = G.
double probe_loss(const MLP& net, const Matrix& x, const Matrix& g) { return (net.forward(x).array() * g.array()).sum(); }

void check_gradients(const MLPSpec& spec, std::uint64_t seed) {
    MLP net(spec);
    const Matrix x = fixtures::random_matrix(4, spec.layer_dims.front(), seed);
    const Matrix g = fixtures::random_matrix(4, spec.layer_dims.back(), seed + 1);
    MLP::Tape tape;
    net.forward(x, &tape);
    const Gradients grads = net.backward(tape, g);
    const double h = 1e-5;

    // Parameters, through the flattened layout (weights column-major, then bias, per layer).
    const Vector p = net.flatten();
    Vector analytic(p.size());
    Index k = 0;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        const Matrix& gw = grads.weight[l];
        for (Index j = 0; j < gw.cols(); ++j) {
            for (Index i = 0; i < gw.rows(); ++i) analytic(k++) = gw(i, j);
        }
        for (Index i = 0; i < grads.bias[l].size(); ++i) analytic(k++) = grads.bias[l](i);
    }
    ASSERT_EQ(k, p.size());
    for (Index i = 0; i < p.size(); ++i) {
        MLP plus = net;
        MLP minus = net;
        Vector pp = p;
        pp(i) += h;
        plus.unflatten(pp);
        pp(i) -= 2.0 * h;
        minus.unflatten(pp);
        const double fd = (probe_loss(plus, x, g) - probe_loss(minus, x, g)) / (2.0 * h);
        EXPECT_LT(relative_error(analytic(i), fd), 1e-5) << "parameter " << i;
    }
    for (Index r = 0; r < x.rows(); ++r) {
        for (Index c = 0; c < x.cols(); ++c) {
            Matrix xp = x;
            Matrix xm = x;
            xp(r, c) += h;
            xm(r, c) -= h;
            const double fd = (probe_loss(net, xp, g) - probe_loss(net, xm, g)) / (2.0 * h);
            EXPECT_LT(relative_error(grads.input(r, c), fd), 1e-5) << "input " << r << "," << c;
        }
    }
}

MLP identity_network(Index d) {
    Layer l;
    l.weight = Matrix::Identity(d, d);
    l.activation = Activation::Linear;
    return MLP(std::vector<Layer>{l});
}

OptimizerSpec adam(double lr, int epochs, Index batch = 64, std::uint64_t seed = 0) {
    OptimizerSpec o;
    o.learning_rate = lr;
    o.epochs = epochs;
    o.batch_size = batch;
    o.seed = seed;
    return o;
}

Dataset moons(Index n, std::uint64_t seed) {
    data::TwoMoonsConfig cfg;
    cfg.n_train = n;
    cfg.seed = seed;
    return data::gen_two_moons(cfg);
}

}  // namespace

TEST(Mlp, LinearLayerForwardAndWeightGradient) {
    Layer l;
    l.weight = fixtures::random_matrix(3, 2, 1);
    const MLP net(std::vector<Layer>{l});
    const Matrix x = fixtures::random_matrix(1, 2, 2);
    MLP::Tape tape;
    const Matrix y = net.forward(x, &tape);
    EXPECT_LT((y - x * l.weight.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    const Matrix g = fixtures::random_matrix(1, 3, 3);
    const auto grads = net.backward(tape, g);
    EXPECT_LT((grads.weight[0] - g.transpose() * x).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((grads.input - g * l.weight).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Mlp, FiniteDifferenceGradients) {
    for (auto act : {Activation::ELU, Activation::ReLU, Activation::Linear}) {
        for (bool bias : {true, false}) {
            check_gradients({{3, 5, 4, 2}, act, bias, 7}, 11);
        }
    }
    check_gradients({{2, 6, 1}, Activation::ELU, true, 8}, 12);
}

TEST(Mlp, ActivationDerivativesMatchFiniteDifferences) {
    const Matrix z = fixtures::random_matrix(5, 4, 13, 2.0);
    const double h = 1e-6;
    for (auto act : {Activation::ELU, Activation::ReLU, Activation::Linear}) {
        const Matrix fd = (activate(act, z.array() + h) - activate(act, z.array() - h)) / (2.0 * h);
        EXPECT_LT((activate_derivative(act, z) - fd).cwiseAbs().maxCoeff(), 1e-6) << to_string(act);
    }
}

TEST(Mlp, ZeroInputWithoutBiasGivesZeroOutput) {
    for (auto act : {Activation::ELU, Activation::ReLU, Activation::Linear}) {
        const MLP net({{4, 8, 3}, act, false, 1});
        EXPECT_TRUE(net.forward(Matrix::Zero(2, 4)).isZero(0.0));
    }
}

TEST(Mlp, DimensionMismatch) {
    const MLP net({{3, 2}, Activation::Linear, false, 1});
    try {
        net.forward(Matrix::Zero(1, 4));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
}

TEST(Mlp, FlattenRoundTrip) {
    MLP net({{3, 4, 2}, Activation::ELU, true, 2});
    const Vector p = net.flatten();
    EXPECT_EQ(p.size(), net.parameter_count());
    EXPECT_EQ(net.parameter_count(), 3 * 4 + 4 + 4 * 2 + 2);
    MLP other({{3, 4, 2}, Activation::ELU, true, 3});
    other.unflatten(p);
    EXPECT_EQ(other.flatten(), p);
}

TEST(Autoencoder, FullWidthLinearReachesNearZeroError) {
    const Dataset d = Dataset::uniform(fixtures::random_matrix(200, 3, 20));
    const auto m = fit_autoencoder(d, {{3, 3}, Activation::Linear, true, 1}, adam(1e-2, 300, 32, 1), {});
    EXPECT_LT(m.score_batch(d.rows).mean(), 1e-4);
}

TEST(Autoencoder, LinearBottleneckFindsPrincipalSubspace) {
    const Matrix x = fixtures::random_matrix(400, 3, 21) * Vector{{3.0, 1.0, 0.3}}.asDiagonal();
    const auto m = fit_autoencoder(Dataset::uniform(x), {{3, 1}, Activation::Linear, true, 2}, adam(1e-2, 300, 32, 2), {});
    const Matrix c = x.rowwise() - x.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Matrix> es(c.transpose() * c);
    const Vector top = es.eigenvectors().col(2);
    const Vector dec = m.decoder.layers().back().weight.col(0).normalized();
    const double angle = std::acos(std::min(1.0, std::abs(top.dot(dec)))) * 180.0 / 3.141592653589793;
    EXPECT_LT(angle, 5.0);
}

TEST(Autoencoder, TwoMoonsSeparatesUniformAnomalies) {
    const Dataset train = moons(600, 22);
    const Dataset hold = moons(100, 23);
    const auto m = fit_autoencoder(train, {{2, 32, 32, 1}, Activation::ELU, true, 3}, adam(3e-3, 150, 64, 3), hold);
    const Vector normal = m.score_batch(moons(300, 24).rows);
    const Vector anomalous = m.score_batch(data::sample_uniform_anomalies(data::two_moons_box(), 300, 25).rows);
    auto median = [](const Vector& v) {
        std::vector<double> s(v.data(), v.data() + v.size());
        std::nth_element(s.begin(), s.begin() + static_cast<long>(s.size() / 2), s.end());
        return s[s.size() / 2];
    };
    EXPECT_LT(median(normal) / median(anomalous), 0.2);
    EXPECT_GE(m.best_epoch, 0);
    EXPECT_EQ(m.holdout_loss.size(), 150u);
}

TEST(Autoencoder, KeepsBestHoldoutEpoch) {
    const Dataset train = moons(200, 26);
    const Dataset hold = moons(50, 27);
    const auto m = fit_autoencoder(train, {{2, 8, 1}, Activation::ELU, true, 4}, adam(1e-2, 40, 32, 4), hold);
    const double best = *std::min_element(m.holdout_loss.begin(), m.holdout_loss.end());
    EXPECT_DOUBLE_EQ(m.holdout_loss[static_cast<std::size_t>(m.best_epoch)], best);
    EXPECT_NEAR(m.score_batch(hold.rows).mean(), best, 1e-12 * std::max(1.0, best));
}

TEST(Autoencoder, DivergenceIsReported) {
    const Dataset d = Dataset::uniform(fixtures::random_matrix(50, 2, 28, 1e6));
    OptimizerSpec o = adam(1.0, 50, 50);
    o.kind = OptimizerKind::SGD;
    o.learning_rate = 1e3;
    try {
        fit_autoencoder(d, {{2, 4, 1}, Activation::Linear, true, 5}, o, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Diverged);
    }
}

TEST(DeepSvdd, FrozenIdentityEqualsCentroidDistance) {
    const Dataset d = Dataset::uniform(fixtures::random_matrix(30, 2, 30) + Matrix::Constant(30, 2, 1.0));
    const auto m = fit_deep_svdd(d, identity_network(2), adam(1e-3, 0), {});
    const RowVector mean = d.rows.colwise().mean();
    const Matrix probes = fixtures::random_matrix(10, 2, 31);
    for (Index i = 0; i < probes.rows(); ++i) EXPECT_NEAR(m.score(probes.row(i)), (probes.row(i) - mean).squaredNorm(), 1e-12);
}

TEST(DeepSvdd, BiasForbidden) {
    const Dataset d = Dataset::uniform(fixtures::random_matrix(10, 2, 32));
    try {
        fit_deep_svdd(d, MLPSpec{{2, 4, 2}, Activation::ELU, true, 1}, adam(1e-3, 1), {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BiasTermsForbidden);
    }
}

TEST(DeepSvdd, CollapseGuardTriggers) {
    // A constant input feature lets the network map everything onto the center.
    Matrix x = fixtures::random_matrix(64, 2, 33);
    x.col(1).setOnes();
    OptimizerSpec o = adam(0.05, 3000, 64, 1);
    try {
        fit_deep_svdd(Dataset::uniform(x), MLPSpec{{2, 2}, Activation::Linear, false, 6}, o, {});
        FAIL() << "collapse not detected";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CollapseDetected);
        EXPECT_NE(std::string(e.what()).find("embedding variance"), std::string::npos);
    }
}

TEST(DeepSvdd, SadPushesLabeledAnomalyAway) {
    const Dataset train = moons(200, 34);
    Dataset labeled = Dataset::uniform(Matrix(RowVector{{0.0, 1.0}}), Label::Anomaly);
    DeepSVDDOptions opts;
    opts.variant = DeepSVDDVariant::SAD;
    OptimizerSpec o;
    o.kind = OptimizerKind::SGD;
    o.learning_rate = 1e-3;
    o.batch_size = 1000;
    o.epochs = 30;
    std::vector<double> trajectory;
    const RowVector anomaly = labeled.rows.row(0);
    const auto m = fit_deep_svdd(train, MLPSpec{{2, 16, 4}, Activation::ELU, false, 7}, o, opts, labeled,
                                 [&](int, const DeepSVDDModel& model) { trajectory.push_back(model.score(anomaly)); });
    ASSERT_EQ(trajectory.size(), 30u);
    for (std::size_t i = 1; i < trajectory.size(); ++i) EXPECT_GT(trajectory[i], trajectory[i - 1]) << "epoch " << i;
    EXPECT_EQ(m.variant, DeepSVDDVariant::SAD);
}

TEST(DeepSvdd, SadNeedsLabels) {
    DeepSVDDOptions opts;
    opts.variant = DeepSVDDVariant::SAD;
    EXPECT_THROW(fit_deep_svdd(moons(20, 1), MLPSpec{{2, 2}, Activation::ELU, false, 1}, adam(1e-3, 1), opts), Error);
}

TEST(DeepSvdd, OneClassObjectiveNonIncreasingUnderFullBatchDescent) {
    const Dataset d = Dataset::uniform(fixtures::random_matrix(50, 3, 35) + Matrix::Constant(50, 3, 0.5));
    OptimizerSpec o;
    o.kind = OptimizerKind::SGD;
    o.learning_rate = 1e-2;
    o.batch_size = 50;
    o.epochs = 100;
    const auto m = fit_deep_svdd(d, MLPSpec{{3, 2}, Activation::Linear, false, 8}, o, {});
    for (std::size_t i = 1; i < m.loss_trace.size(); ++i) EXPECT_LE(m.loss_trace[i], m.loss_trace[i - 1] + 1e-15);
}

TEST(DeepSvdd, SoftBoundaryRadiusIsDistanceQuantile) {
    const Dataset d = moons(200, 36);
    DeepSVDDOptions opts;
    opts.variant = DeepSVDDVariant::SoftBoundary;
    opts.nu = 0.1;
    const auto m = fit_deep_svdd(d, MLPSpec{{2, 16, 4}, Activation::ELU, false, 9}, adam(1e-3, 20), opts);
    const Vector s = m.score_batch(d.rows);
    const double outside = static_cast<double>((s.array() > 0.0).count()) / 200.0;
    EXPECT_LE(outside, 0.1 + 1.0 / 200.0);
    EXPECT_GT(m.radius2, 0.0);
}

TEST(DeepSvdd, DeterministicUnderSeed) {
    const Dataset d = moons(150, 37);
    const MLPSpec spec{{2, 16, 4}, Activation::ELU, false, 10};
    const auto a = fit_deep_svdd(d, spec, adam(1e-3, 5, 32, 3), {});
    const auto b = fit_deep_svdd(d, spec, adam(1e-3, 5, 32, 3), {});
    EXPECT_EQ(a.network.flatten(), b.network.flatten());
    EXPECT_EQ(a.loss_trace, b.loss_trace);
}

TEST(EmbeddingVariance, Cases) {
    const Matrix x = fixtures::random_matrix(100, 3, 40);
    Layer zero;
    zero.weight = Matrix::Zero(2, 3);
    EXPECT_EQ(embedding_variance(MLP(std::vector<Layer>{zero}), x), 0.0);
    const RowVector mu = x.colwise().mean();
    const double raw = (x.rowwise() - mu).array().square().mean();
    EXPECT_NEAR(embedding_variance(identity_network(3), x), raw, 1e-12);
    EXPECT_GT(embedding_variance(MLP({{3, 8, 2}, Activation::ELU, false, 1}), x), 0.0);
}
