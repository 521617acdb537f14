#include "anoscope/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

namespace anoscope::checkpoint {

namespace {

constexpr const char* kMagic = "anoscope-model";
constexpr int kVersion = 1;

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_real(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw Error(ErrorCode::ParseError, "bad number '" + s + "' in checkpoint");
    return v;
}

long long parse_int(const std::string& s) {
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') throw Error(ErrorCode::ParseError, "bad integer '" + s + "' in checkpoint");
    return v;
}

void check_name(const std::string& s) {
    if (s.empty() || s.find_first_of(" \t\r\n") != std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "checkpoint names and text values must be single tokens");
    }
}

}  // namespace

// ---- Writer --------------------------------------------------------------------

void Writer::text(const std::string& name, const std::string& value) {
    check_name(name);
    check_name(value);
    out_ << "text " << name << ' ' << value << '\n';
}

void Writer::integer(const std::string& name, long long value) {
    check_name(name);
    out_ << "int " << name << ' ' << value << '\n';
}

void Writer::scalar(const std::string& name, double value) {
    check_name(name);
    out_ << "real " << name << ' ' << hex(value) << '\n';
}

void Writer::vector(const std::string& name, const Vector& v) {
    check_name(name);
    out_ << "vector " << name << ' ' << v.size() << '\n';
    for (Index i = 0; i < v.size(); ++i) out_ << (i ? " " : "") << hex(v(i));
    out_ << '\n';
}

void Writer::matrix(const std::string& name, const Matrix& m) {
    check_name(name);
    out_ << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) out_ << (c ? " " : "") << hex(m(r, c));
        out_ << '\n';
    }
}

void Writer::series(const std::string& name, const std::vector<double>& v) {
    vector(name, Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
}

void Writer::indices(const std::string& name, const std::vector<Index>& v) {
    check_name(name);
    out_ << "indices " << name << ' ' << v.size() << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? " " : "") << v[i];
    out_ << '\n';
}

void Writer::kernel(const std::string& prefix, const KernelSpec& k) {
    text(prefix + ".kind", to_string(k.kind));
    scalar(prefix + ".gamma", k.gamma);
    if (k.kind == KernelKind::Mahalanobis) {
        matrix(prefix + ".metric", k.metric);
        matrix(prefix + ".transform", k.transform_);
    }
}

void Writer::network(const std::string& prefix, const deep::MLP& net) {
    const auto& layers = net.layers();
    integer(prefix + ".layers", static_cast<long long>(layers.size()));
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string p = prefix + "." + std::to_string(i);
        text(p + ".activation", deep::to_string(layers[i].activation));
        matrix(p + ".weight", layers[i].weight);
        vector(p + ".bias", layers[i].bias);
    }
}

// ---- Reader --------------------------------------------------------------------

Reader::Reader(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kMagic) throw Error(ErrorCode::ParseError, "not an anoscope checkpoint");
    if (version != kVersion) throw Error(ErrorCode::ParseError, "unsupported checkpoint version " + std::to_string(version));
    std::string kind;
    while (in >> kind) {
        if (kind == "end") return;
        Entry e;
        e.kind = kind;
        std::string name;
        if (!(in >> name)) break;
        std::size_t count = 1;
        if (kind == "vector" || kind == "indices") {
            in >> e.rows;
            e.cols = 1;
            count = static_cast<std::size_t>(e.rows);
        } else if (kind == "matrix") {
            in >> e.rows >> e.cols;
            count = static_cast<std::size_t>(e.rows * e.cols);
        } else if (kind != "text" && kind != "int" && kind != "real") {
            throw Error(ErrorCode::ParseError, "unknown checkpoint entry kind '" + kind + "'");
        }
        if (!in || e.rows < 0 || e.cols < 0) throw Error(ErrorCode::ParseError, "bad shape for '" + name + "'");
        e.tokens.resize(count);
        for (auto& t : e.tokens) {
            if (!(in >> t)) throw Error(ErrorCode::ParseError, "truncated checkpoint at '" + name + "'");
        }
        entries_[name] = std::move(e);
    }
    throw Error(ErrorCode::ParseError, "checkpoint is missing its end marker");
}

const Reader::Entry& Reader::get(const std::string& name, const std::string& kind) const {
    const auto it = entries_.find(name);
    if (it == entries_.end()) throw Error(ErrorCode::ParseError, "checkpoint lacks '" + name + "'");
    if (it->second.kind != kind) throw Error(ErrorCode::ParseError, "'" + name + "' is not a " + kind);
    return it->second;
}

std::string Reader::text(const std::string& name) const { return get(name, "text").tokens.front(); }
long long Reader::integer(const std::string& name) const { return parse_int(get(name, "int").tokens.front()); }
double Reader::scalar(const std::string& name) const { return parse_real(get(name, "real").tokens.front()); }

Vector Reader::vector(const std::string& name) const {
    const auto& e = get(name, "vector");
    Vector v(e.rows);
    for (Index i = 0; i < e.rows; ++i) v(i) = parse_real(e.tokens[static_cast<std::size_t>(i)]);
    return v;
}

Matrix Reader::matrix(const std::string& name) const {
    const auto& e = get(name, "matrix");
    Matrix m(e.rows, e.cols);
    std::size_t k = 0;
    for (Index r = 0; r < e.rows; ++r) {
        for (Index c = 0; c < e.cols; ++c) m(r, c) = parse_real(e.tokens[k++]);
    }
    return m;
}

std::vector<double> Reader::series(const std::string& name) const {
    const Vector v = vector(name);
    return {v.data(), v.data() + v.size()};
}

std::vector<Index> Reader::indices(const std::string& name) const {
    const auto& e = get(name, "indices");
    std::vector<Index> out;
    for (const auto& t : e.tokens) out.push_back(static_cast<Index>(parse_int(t)));
    return out;
}

KernelSpec Reader::kernel(const std::string& prefix) const {
    const std::string kind = text(prefix + ".kind");
    KernelSpec k;
    k.gamma = scalar(prefix + ".gamma");
    if (kind == to_string(KernelKind::Linear)) {
        k.kind = KernelKind::Linear;
    } else if (kind == to_string(KernelKind::RBF)) {
        k.kind = KernelKind::RBF;
    } else if (kind == to_string(KernelKind::Mahalanobis)) {
        k.kind = KernelKind::Mahalanobis;
        k.metric = matrix(prefix + ".metric");
        k.transform_ = matrix(prefix + ".transform");
    } else {
        throw Error(ErrorCode::ParseError, "unknown kernel kind '" + kind + "'");
    }
    return k;
}

deep::MLP Reader::network(const std::string& prefix) const {
    const long long n = integer(prefix + ".layers");
    std::vector<deep::Layer> layers;
    for (long long i = 0; i < n; ++i) {
        const std::string p = prefix + "." + std::to_string(i);
        deep::Layer l;
        l.activation = deep::activation_from_string(text(p + ".activation"));
        l.weight = matrix(p + ".weight");
        l.bias = vector(p + ".bias");
        layers.push_back(std::move(l));
    }
    return deep::MLP(std::move(layers));
}

// ---- Models --------------------------------------------------------------------

namespace {

void save(Writer& w, const prob::GaussianModel& m) {
    w.row("mean", m.mean);
    w.matrix("covariance", m.covariance);
    w.matrix("precision", m.precision);
    w.scalar("log_det", m.log_det);
}

void save(Writer& w, const prob::GMMModel& m) {
    w.vector("weights", m.weights);
    for (Index k = 0; k < m.k(); ++k) {
        const std::string p = "component." + std::to_string(k);
        const auto i = static_cast<std::size_t>(k);
        w.row(p + ".mean", m.means[i]);
        w.matrix(p + ".covariance", m.covariances[i]);
        w.matrix(p + ".precision", m.precisions[i]);
        w.scalar(p + ".log_det", m.log_dets[i]);
    }
    w.series("log_likelihood_trace", m.log_likelihood_trace);
}

void save(Writer& w, const prob::KDEModel& m) {
    w.matrix("training_points", m.training_points);
    w.kernel("kernel", m.kernel);
}

void save(Writer& w, const prob::PPCAModel& m) {
    w.matrix("loadings", m.loadings);
    w.scalar("sigma2", m.sigma2);
    w.row("mean", m.mean);
    w.matrix("precision", m.precision);
    w.scalar("log_det", m.log_det);
}

void save(Writer& w, const oneclass::MVEModel& m) {
    w.row("center", m.center);
    w.matrix("shape", m.shape);
    w.matrix("precision", m.precision);
    w.scalar("radius2", m.radius2);
    w.scalar("support_fraction", m.support_fraction);
    w.indices("support", m.support);
    w.series("determinant_trace", m.determinant_trace);
}

void save(Writer& w, const oneclass::SVDDModel& m) {
    w.matrix("training_points", m.training_points);
    w.vector("alphas", m.alphas);
    w.kernel("kernel", m.kernel);
    w.indices("support_indices", m.support_indices);
    w.scalar("radius2", m.radius2);
    w.scalar("nu", m.nu);
    w.scalar("center_norm2", m.center_norm2);
    w.integer("iterations", m.iterations);
}

void save(Writer& w, const oneclass::OCSVMModel& m) {
    w.matrix("training_points", m.training_points);
    w.vector("alphas", m.alphas);
    w.kernel("kernel", m.kernel);
    w.indices("support_indices", m.support_indices);
    w.scalar("rho", m.rho);
    w.scalar("nu", m.nu);
    w.integer("iterations", m.iterations);
}

void save(Writer& w, const oneclass::SemiSupervisedSVDDModel& m) {
    w.matrix("expansion_points", m.expansion_points);
    w.vector("beta", m.beta);
    w.kernel("kernel", m.kernel);
    w.scalar("radius2", m.radius2);
    w.scalar("center_norm2", m.center_norm2);
    w.series("objective_trace", m.objective_trace);
}

void save(Writer& w, const recon::PCAModel& m) {
    w.row("mean", m.mean);
    w.matrix("components", m.components);
    w.vector("explained_variance", m.explained_variance);
    w.scalar("variance_fraction", m.variance_fraction);
}

void save(Writer& w, const recon::KPCAModel& m) {
    w.matrix("training_points", m.training_points);
    w.kernel("kernel", m.kernel);
    w.matrix("coefficients", m.coefficients);
    w.vector("eigenvalues", m.eigenvalues);
    w.vector("kernel_row_means", m.kernel_row_means);
    w.scalar("grand_mean", m.grand_mean);
    w.scalar("variance_fraction", m.variance_fraction);
}

void save(Writer& w, const recon::VQModel& m) {
    w.matrix("prototypes", m.prototypes);
    w.text("norm", m.norm == recon::VQNorm::L1 ? "l1" : "l2");
    w.series("objective_trace", m.objective_trace);
}

void save(Writer& w, const deep::AEModel& m) {
    w.network("encoder", m.encoder);
    w.network("decoder", m.decoder);
    w.integer("bottleneck", m.bottleneck);
    w.integer("best_epoch", m.best_epoch);
    w.series("train_loss", m.train_loss);
    w.series("holdout_loss", m.holdout_loss);
}

void save(Writer& w, const deep::DeepSVDDModel& m) {
    w.network("network", m.network);
    w.row("center", m.center);
    w.text("variant", deep::to_string(m.variant));
    w.scalar("radius2", m.radius2);
    w.scalar("nu", m.nu);
    w.scalar("eta", m.eta);
    w.series("loss_trace", m.loss_trace);
    w.series("variance_trace", m.variance_trace);
}

DetectorModel load_body(const Reader& r, const std::string& method) {
    if (method == "gaussian") {
        return {prob::GaussianModel{r.row("mean"), r.matrix("covariance"), r.matrix("precision"), r.scalar("log_det")}};
    }
    if (method == "gmm") {
        prob::GMMModel m;
        m.weights = r.vector("weights");
        for (Index k = 0; k < m.weights.size(); ++k) {
            const std::string p = "component." + std::to_string(k);
            m.means.push_back(r.row(p + ".mean"));
            m.covariances.push_back(r.matrix(p + ".covariance"));
            m.precisions.push_back(r.matrix(p + ".precision"));
            m.log_dets.push_back(r.scalar(p + ".log_det"));
        }
        m.log_likelihood_trace = r.series("log_likelihood_trace");
        return {std::move(m)};
    }
    if (method == "kde") return {prob::KDEModel{r.matrix("training_points"), r.kernel("kernel")}};
    if (method == "ppca") {
        return {prob::PPCAModel{r.matrix("loadings"), r.scalar("sigma2"), r.row("mean"), r.matrix("precision"),
                                r.scalar("log_det")}};
    }
    if (method == "mve") {
        oneclass::MVEModel m;
        m.center = r.row("center");
        m.shape = r.matrix("shape");
        m.precision = r.matrix("precision");
        m.radius2 = r.scalar("radius2");
        m.support_fraction = r.scalar("support_fraction");
        m.support = r.indices("support");
        m.determinant_trace = r.series("determinant_trace");
        return {std::move(m)};
    }
    if (method == "svdd") {
        oneclass::SVDDModel m;
        m.training_points = r.matrix("training_points");
        m.alphas = r.vector("alphas");
        m.kernel = r.kernel("kernel");
        m.support_indices = r.indices("support_indices");
        m.radius2 = r.scalar("radius2");
        m.nu = r.scalar("nu");
        m.center_norm2 = r.scalar("center_norm2");
        m.iterations = r.integer("iterations");
        return {std::move(m)};
    }
    if (method == "ocsvm") {
        oneclass::OCSVMModel m;
        m.training_points = r.matrix("training_points");
        m.alphas = r.vector("alphas");
        m.kernel = r.kernel("kernel");
        m.support_indices = r.indices("support_indices");
        m.rho = r.scalar("rho");
        m.nu = r.scalar("nu");
        m.iterations = r.integer("iterations");
        return {std::move(m)};
    }
    if (method == "ssvdd") {
        oneclass::SemiSupervisedSVDDModel m;
        m.expansion_points = r.matrix("expansion_points");
        m.beta = r.vector("beta");
        m.kernel = r.kernel("kernel");
        m.radius2 = r.scalar("radius2");
        m.center_norm2 = r.scalar("center_norm2");
        m.objective_trace = r.series("objective_trace");
        return {std::move(m)};
    }
    if (method == "pca") {
        recon::PCAModel m;
        m.mean = r.row("mean");
        m.components = r.matrix("components");
        m.explained_variance = r.vector("explained_variance");
        m.variance_fraction = r.scalar("variance_fraction");
        return {std::move(m)};
    }
    if (method == "kpca") {
        recon::KPCAModel m;
        m.training_points = r.matrix("training_points");
        m.kernel = r.kernel("kernel");
        m.coefficients = r.matrix("coefficients");
        m.eigenvalues = r.vector("eigenvalues");
        m.kernel_row_means = r.vector("kernel_row_means");
        m.grand_mean = r.scalar("grand_mean");
        m.variance_fraction = r.scalar("variance_fraction");
        return {std::move(m)};
    }
    if (method == "vq") {
        recon::VQModel m;
        m.prototypes = r.matrix("prototypes");
        m.norm = r.text("norm") == "l1" ? recon::VQNorm::L1 : recon::VQNorm::L2;
        m.objective_trace = r.series("objective_trace");
        return {std::move(m)};
    }
    if (method == "ae") {
        deep::AEModel m;
        m.encoder = r.network("encoder");
        m.decoder = r.network("decoder");
        m.bottleneck = static_cast<Index>(r.integer("bottleneck"));
        m.best_epoch = static_cast<int>(r.integer("best_epoch"));
        m.train_loss = r.series("train_loss");
        m.holdout_loss = r.series("holdout_loss");
        return {std::move(m)};
    }
    if (method == "dsvdd") {
        deep::DeepSVDDModel m;
        m.network = r.network("network");
        m.center = r.row("center");
        const std::string v = r.text("variant");
        if (v == deep::to_string(deep::DeepSVDDVariant::OneClass)) m.variant = deep::DeepSVDDVariant::OneClass;
        else if (v == deep::to_string(deep::DeepSVDDVariant::SoftBoundary)) m.variant = deep::DeepSVDDVariant::SoftBoundary;
        else if (v == deep::to_string(deep::DeepSVDDVariant::SAD)) m.variant = deep::DeepSVDDVariant::SAD;
        else throw Error(ErrorCode::ParseError, "unknown Deep SVDD variant '" + v + "'");
        m.radius2 = r.scalar("radius2");
        m.nu = r.scalar("nu");
        m.eta = r.scalar("eta");
        m.loss_trace = r.series("loss_trace");
        m.variance_trace = r.series("variance_trace");
        return {std::move(m)};
    }
    throw Error(ErrorCode::ParseError, "unknown model method '" + method + "'");
}

}  // namespace

void save_model(std::ostream& out, const DetectorModel& model) {
    out << kMagic << ' ' << kVersion << '\n';
    Writer w(out);
    w.text("method", model.method());
    std::visit([&](const auto& m) { save(w, m); }, model.model);
    out << "end\n";
}

DetectorModel load_model(std::istream& in) {
    const Reader r(in);
    return load_body(r, r.text("method"));
}

void save_model(const std::string& path, const DetectorModel& model) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IOError, "cannot open '" + path + "' for writing");
    save_model(f, model);
    if (!f) throw Error(ErrorCode::IOError, "failed writing '" + path + "'");
}

DetectorModel load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::MissingFile, "cannot open '" + path + "'");
    return load_model(f);
}

}  // namespace anoscope::checkpoint
