#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <sstream>

#include "anoscope/checkpoint.hpp"
#include "helpers.hpp"

using namespace anoscope;

namespace {

ModelingDimensions dims(LossKind loss, ModelFamily family, FeatureMap map = FeatureMap::raw()) {
    ModelingDimensions d;
    d.loss.kind = loss;
    d.family = family;
    d.feature_map = map;
    d.regularization.optimizer.epochs = 10;
    d.regularization.optimizer.learning_rate = 1e-2;
    d.regularization.subspace_dim = 1;
    return d;
}

deep::MLPSpec net(std::vector<Index> layers, bool bias) { return {std::move(layers), deep::Activation::ELU, bias, 2}; }

std::vector<ModelingDimensions> every_family() {
    Matrix metric(2, 2);
    metric << 1.0, 0.2, 0.2, 0.5;
    const auto rbf = FeatureMap::with_kernel(KernelSpec::rbf(0.5));
    return {
        dims(LossKind::NegLogLikelihood, ModelFamily::Gaussian),
        dims(LossKind::NegLogLikelihood, ModelFamily::GaussianMixture),
        dims(LossKind::NegLogLikelihood, ModelFamily::KernelDensity, FeatureMap::with_kernel(KernelSpec::mahalanobis(metric, 0.5))),
        dims(LossKind::NegLogLikelihood, ModelFamily::ProbabilisticPCA),
        dims(LossKind::Hinge, ModelFamily::Ellipsoid),
        dims(LossKind::ShiftedHinge, ModelFamily::Hypersphere, rbf),
        dims(LossKind::ShiftedHinge, ModelFamily::Hyperplane, rbf),
        dims(LossKind::SquaredError, ModelFamily::Subspace),
        dims(LossKind::SquaredError, ModelFamily::Subspace, rbf),
        dims(LossKind::SquaredError, ModelFamily::Prototypes),
        dims(LossKind::SquaredError, ModelFamily::Autoencoder, FeatureMap::neural(net({2, 6, 1}, true))),
        dims(LossKind::Hinge, ModelFamily::Hypersphere, FeatureMap::neural(net({2, 6, 3}, false))),
    };
}

DetectorModel round_trip(const DetectorModel& m) {
    std::stringstream buf;
    checkpoint::save_model(buf, m);
    return checkpoint::load_model(buf);
}

void expect_bit_identical(const Vector& a, const Vector& b, const std::string& what) {
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())), 0) << what;
}

}  // namespace

TEST(Checkpoint, EveryModelRoundTripsBitExactly) {
    const Dataset train = Dataset::uniform(fixtures::random_matrix(50, 2, 1));
    const Matrix probes = fixtures::random_matrix(20, 2, 2, 2.0);
    std::vector<std::string> seen;
    for (const auto& d : every_family()) {
        const auto m = build_detector(d).fit(train);
        const auto back = round_trip(m);
        EXPECT_EQ(back.method(), m.method());
        EXPECT_EQ(back.has_intrinsic_boundary(), m.has_intrinsic_boundary());
        expect_bit_identical(m.score_batch(probes), back.score_batch(probes), m.method());
        seen.push_back(m.method());
    }
    // Semi-supervised SVDD and Deep SAD need labels.
    Dataset labeled = train;
    labeled.labels[0] = Label::Anomaly;
    labeled.labels[1] = Label::Normal;
    for (const auto& d : {dims(LossKind::ShiftedHinge, ModelFamily::Hypersphere, FeatureMap::with_kernel(KernelSpec::rbf(0.5))),
                          dims(LossKind::SemiSupExponent, ModelFamily::Hypersphere, FeatureMap::neural(net({2, 4}, false)))}) {
        const auto m = build_detector(d).fit(labeled);
        expect_bit_identical(m.score_batch(probes), round_trip(m).score_batch(probes), m.method());
        seen.push_back(m.method());
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    EXPECT_EQ(seen.size(), 13u);
}

TEST(Checkpoint, FileRoundTrip) {
    const auto m = build_detector(dims(LossKind::NegLogLikelihood, ModelFamily::Gaussian)).fit(Dataset::uniform(fixtures::random_matrix(10, 3, 3)));
    const auto path = fixtures::temp_path("gaussian.model");
    checkpoint::save_model(path, m);
    const auto back = checkpoint::load_model(path);
    const RowVector x{{0.1, 0.2, 0.3}};
    EXPECT_EQ(back.score(x), m.score(x));
}

TEST(Checkpoint, HeaderAndErrors) {
    const auto m = build_detector(dims(LossKind::NegLogLikelihood, ModelFamily::Gaussian)).fit(Dataset::uniform(fixtures::random_matrix(10, 2, 4)));
    std::stringstream buf;
    checkpoint::save_model(buf, m);
    EXPECT_EQ(buf.str().rfind("anoscope-model 1\n", 0), 0u);

    std::stringstream bad("not-a-model\n");
    try {
        checkpoint::load_model(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
    }
    std::string truncated = buf.str();
    truncated.resize(truncated.size() / 2);
    std::stringstream cut(truncated);
    EXPECT_THROW(checkpoint::load_model(cut), Error);
    try {
        checkpoint::load_model(std::string("/nonexistent/model.txt"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingFile);
    }
}

TEST(Checkpoint, NetworkLayoutIsSelfDescribing) {
    const deep::MLP original(net({3, 5, 2}, true));
    std::stringstream buf;
    buf << "anoscope-model 1\n";
    checkpoint::Writer w(buf);
    w.network("net", original);
    buf << "end\n";
    const std::string text = buf.str();
    EXPECT_NE(text.find("text net.0.activation elu"), std::string::npos) << text.substr(0, 200);
    checkpoint::Reader r(buf);
    const auto back = r.network("net");
    EXPECT_EQ(back.flatten(), original.flatten());
    EXPECT_EQ(back.layers()[1].activation, deep::Activation::Linear);
}
