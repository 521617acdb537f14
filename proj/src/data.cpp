#include "anoscope/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "anoscope/stats.hpp"

namespace anoscope::data {

Dataset gen_two_moons(const TwoMoonsConfig& cfg) {
    if (cfg.n_train < 1 || !(cfg.big_radius > 0) || !(cfg.small_radius > 0) ||
        !(cfg.noise_sigma_big >= 0) || !(cfg.noise_sigma_small >= 0)) {
        throw Error(ErrorCode::InvalidConfig, "two-moons config needs n >= 1, positive radii, non-negative noise");
    }
    const double frac = cfg.big_fraction.value_or(cfg.big_radius / (cfg.big_radius + cfg.small_radius));
    if (!(frac >= 0.0 && frac <= 1.0)) throw Error(ErrorCode::InvalidConfig, "big_fraction must be in [0, 1]");

    const auto n_big = static_cast<Index>(std::llround(frac * static_cast<double>(cfg.n_train)));
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix x(cfg.n_train, 2);
    for (Index i = 0; i < cfg.n_train; ++i) {
        const double t = angle(rng);
        if (i < n_big) {
            x(i, 0) = cfg.big_radius * std::cos(t);
            x(i, 1) = cfg.big_radius * std::sin(t);
            if (cfg.noise_sigma_big > 0) {
                x(i, 0) += cfg.noise_sigma_big * gauss(rng);
                x(i, 1) += cfg.noise_sigma_big * gauss(rng);
            }
        } else {
            const double s = t + std::numbers::pi;
            x(i, 0) = cfg.small_center[0] + cfg.small_radius * std::cos(s);
            x(i, 1) = cfg.small_center[1] + cfg.small_radius * std::sin(s);
            if (cfg.noise_sigma_small > 0) {
                x(i, 0) += cfg.noise_sigma_small * gauss(rng);
                x(i, 1) += cfg.noise_sigma_small * gauss(rng);
            }
        }
    }
    Dataset out = Dataset::uniform(std::move(x));
    out.feature_names = {"x1", "x2"};
    return out;
}

Box two_moons_box() {
    Box b;
    b.lower = RowVector{{-3.0, -1.0}};
    b.upper = RowVector{{3.0, 3.0}};
    return b;
}

namespace {

void check_box(const Box& b) {
    if (b.lower.size() == 0 || b.lower.size() != b.upper.size() ||
        !((b.upper - b.lower).array() > 0).all()) {
        throw Error(ErrorCode::DegenerateBox, "anomaly box must have positive extent in every dimension");
    }
}

RowVector draw_uniform(const Box& b, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RowVector p(b.dim());
    for (Index j = 0; j < b.dim(); ++j) p(j) = b.lower(j) + u(rng) * (b.upper(j) - b.lower(j));
    return p;
}

}  // namespace

Dataset sample_uniform_anomalies(const Box& bounds, Index m, std::uint64_t seed) {
    check_box(bounds);
    if (m < 1) throw Error(ErrorCode::InvalidArgument, "need at least one anomaly");
    std::mt19937_64 rng(seed);
    Matrix x(m, bounds.dim());
    for (Index i = 0; i < m; ++i) x.row(i) = draw_uniform(bounds, rng);
    return Dataset::uniform(std::move(x), Label::Anomaly);
}

ContaminationResult contaminate(const Dataset& normal, const ContaminationSpec& spec, std::uint64_t seed) {
    if (!(spec.eta >= 0.0 && spec.eta < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "contamination rate must be in [0, 1)");
    }
    ContaminationResult res{normal, {}};
    if (spec.eta == 0.0) return res;
    check_box(spec.anomaly_box);
    if (spec.anomaly_box.dim() != normal.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "anomaly box dimension differs from data");
    }
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(spec.eta);
    for (Index i = 0; i < normal.size(); ++i) {
        if (coin(rng)) {
            res.data.rows.row(i) = draw_uniform(spec.anomaly_box, rng);
            res.replaced.push_back(i);
        }
    }
    return res;
}

std::vector<Index> RobustScaler::zero_iqr_features() const {
    std::vector<Index> out;
    for (Index j = 0; j < iqrs.size(); ++j) {
        if (iqrs(j) == 0.0) out.push_back(j);
    }
    return out;
}

RobustScaler fit_robust_scaler(const Dataset& train) {
    if (train.size() == 0) throw Error(ErrorCode::EmptyTrainingSet, "cannot fit a scaler on zero rows");
    RobustScaler s;
    s.medians.resize(train.dim());
    s.iqrs.resize(train.dim());
    for (Index j = 0; j < train.dim(); ++j) {
        std::vector<double> col(train.rows.col(j).data(), train.rows.col(j).data() + train.size());
        std::sort(col.begin(), col.end());
        s.medians(j) = stats::quantile_sorted(col, 0.5);
        s.iqrs(j) = stats::quantile_sorted(col, 0.75) - stats::quantile_sorted(col, 0.25);
    }
    return s;
}

Dataset apply_scaler(const RobustScaler& scaler, const Dataset& data) {
    if (scaler.medians.size() != data.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "scaler dimension differs from data");
    }
    Dataset out = data;
    for (Index j = 0; j < data.dim(); ++j) {
        out.rows.col(j).array() -= scaler.medians(j);
        if (scaler.iqrs(j) > 0.0) out.rows.col(j).array() /= scaler.iqrs(j);
    }
    return out;
}

namespace {

// Largest-remainder apportionment of `total` items by `fractions`.
std::array<Index, 3> apportion(Index total, const std::array<double, 3>& fractions) {
    std::array<Index, 3> counts{};
    std::array<double, 3> rem{};
    Index assigned = 0;
    for (int k = 0; k < 3; ++k) {
        const double exact = fractions[k] * static_cast<double>(total);
        counts[k] = static_cast<Index>(std::floor(exact + 1e-9));
        rem[k] = exact - static_cast<double>(counts[k]);
        assigned += counts[k];
    }
    while (assigned < total) {
        int best = 0;
        for (int k = 1; k < 3; ++k) {
            if (rem[k] > rem[best]) best = k;
        }
        ++counts[best];
        rem[best] = -1.0;
        ++assigned;
    }
    return counts;
}

}  // namespace

Split stratified_split(const Dataset& data, std::array<double, 3> fractions, std::uint64_t seed) {
    double sum = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0)) throw Error(ErrorCode::FractionsInvalid, "split fractions must be non-negative");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::FractionsInvalid, "split fractions must sum to 1");

    std::vector<Index> anomalies;
    std::vector<Index> others;
    for (Index i = 0; i < data.size(); ++i) {
        (data.labels[static_cast<std::size_t>(i)] == Label::Anomaly ? anomalies : others).push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::shuffle(anomalies.begin(), anomalies.end(), rng);
    std::shuffle(others.begin(), others.end(), rng);

    std::array<std::vector<Index>, 3> parts;
    for (const auto* stratum : {&others, &anomalies}) {
        const auto counts = apportion(static_cast<Index>(stratum->size()), fractions);
        auto it = stratum->begin();
        for (int k = 0; k < 3; ++k) {
            parts[k].insert(parts[k].end(), it, it + counts[k]);
            it += counts[k];
        }
    }
    for (auto& p : parts) std::sort(p.begin(), p.end());
    return Split{data.subset(parts[0]), data.subset(parts[1]), data.subset(parts[2])};
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

std::string label_to_cell(Label l) {
    switch (l) {
        case Label::Normal: return "1";
        case Label::Anomaly: return "-1";
        case Label::Unlabeled: return "";
    }
    return "";
}

Dataset load_csv(const std::string& path, const CsvOptions& opts) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingFile, path);
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IOError, "cannot open " + path);

    std::vector<std::string> header;
    std::vector<std::vector<double>> values;
    std::vector<Label> labels;
    std::string line;
    Index line_no = 0;
    Index width = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_row(line);
        if (opts.has_header && header.empty() && values.empty()) {
            header = std::move(cells);
            width = static_cast<Index>(header.size());
            continue;
        }
        if (width < 0) width = static_cast<Index>(cells.size());
        if (static_cast<Index>(cells.size()) != width) {
            throw Error(ErrorCode::ParseError, "row " + std::to_string(line_no) + ": expected " +
                                                   std::to_string(width) + " cells, got " +
                                                   std::to_string(cells.size()));
        }
        std::vector<double> row;
        Label label = Label::Unlabeled;
        for (Index c = 0; c < width; ++c) {
            const std::string& cell = cells[static_cast<std::size_t>(c)];
            if (opts.label_column && *opts.label_column == c) {
                const bool flag = opts.encoding == LabelEncoding::OutlierFlag;
                const bool one = cell == "1" || cell == "+1" || cell == "1.0" || cell == "+1.0";
                if (cell.empty()) {
                    label = Label::Unlabeled;
                } else if (!flag && one) {
                    label = Label::Normal;
                } else if (!flag && (cell == "-1" || cell == "-1.0")) {
                    label = Label::Anomaly;
                } else if (flag && one) {
                    label = Label::Anomaly;
                } else if (flag && (cell == "0" || cell == "0.0")) {
                    label = Label::Normal;
                } else {
                    throw Error(ErrorCode::ParseError, "row " + std::to_string(line_no) + ", col " +
                                                           std::to_string(c + 1) + ": bad label '" + cell + "'");
                }
                continue;
            }
            double v = 0.0;
            if (!parse_double(cell, v)) {
                throw Error(ErrorCode::ParseError, "row " + std::to_string(line_no) + ", col " +
                                                       std::to_string(c + 1) + ": not a number '" + cell + "'");
            }
            row.push_back(v);
        }
        values.push_back(std::move(row));
        labels.push_back(label);
    }
    if (opts.label_column && width >= 0 && *opts.label_column >= width) {
        throw Error(ErrorCode::ParseError, "label column out of range");
    }
    if (values.empty() || values.front().empty()) throw Error(ErrorCode::ParseError, "no numeric data in " + path);

    const auto n = static_cast<Index>(values.size());
    const auto d = static_cast<Index>(values.front().size());
    Matrix x(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) x(i, j) = values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    std::vector<std::string> names;
    for (Index c = 0; c < static_cast<Index>(header.size()); ++c) {
        if (opts.label_column && *opts.label_column == c) continue;
        names.push_back(header[static_cast<std::size_t>(c)]);
    }
    return Dataset(std::move(x), std::move(labels), std::move(names));
}

void save_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IOError, "cannot write " + path);
    const bool any_label = data.count(Label::Unlabeled) != data.labels.size();
    out.precision(17);
    for (Index j = 0; j < data.dim(); ++j) {
        if (j > 0) out << ',';
        if (static_cast<Index>(data.feature_names.size()) == data.dim()) {
            out << data.feature_names[static_cast<std::size_t>(j)];
        } else {
            out << 'x' << (j + 1);
        }
    }
    if (any_label) out << ",label";
    out << '\n';
    for (Index i = 0; i < data.size(); ++i) {
        for (Index j = 0; j < data.dim(); ++j) {
            if (j > 0) out << ',';
            out << data.rows(i, j);
        }
        if (any_label) out << ',' << label_to_cell(data.labels[static_cast<std::size_t>(i)]);
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::IOError, "write failed for " + path);
}

}  // namespace anoscope::data
