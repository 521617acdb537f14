#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "anoscope/bench.hpp"
#include "anoscope/checkpoint.hpp"
#include "anoscope/core.hpp"
#include "anoscope/data.hpp"
#include "anoscope/detector.hpp"
#include "anoscope/eval.hpp"
#include "anoscope/explain.hpp"
#include "methods.hpp"

namespace py = pybind11;
using namespace anoscope;

namespace {

PyObject* error_type = nullptr;

std::vector<Label> labels_from(const std::vector<int>& raw) {
    std::vector<Label> out;
    out.reserve(raw.size());
    for (int v : raw) {
        if (v != -1 && v != 0 && v != 1) throw Error(ErrorCode::InvalidConfig, "labels must be -1, 0 or +1");
        out.push_back(static_cast<Label>(v));
    }
    return out;
}

std::vector<int> labels_to(const std::vector<Label>& labels) {
    std::vector<int> out;
    out.reserve(labels.size());
    for (Label l : labels) out.push_back(label_sign(l));
    return out;
}

Dataset dataset_from(const Matrix& x, const std::optional<std::vector<int>>& y) {
    if (!y) return Dataset::uniform(x);
    if (static_cast<Index>(y->size()) != x.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "labels must have one entry per row");
    }
    return Dataset(x, labels_from(*y));
}

std::string setting_string(const py::handle& v) {
    if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
    if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
        std::string out;
        for (const auto& item : v) out += (out.empty() ? "" : ",") + py::str(item).cast<std::string>();
        return out;
    }
    if (py::isinstance<py::float_>(v)) {
        std::ostringstream s;
        s.precision(17);
        s << v.cast<double>();
        return s.str();
    }
    return py::str(v).cast<std::string>();
}

DetectorModel fit(const std::string& method, const Matrix& x, const std::optional<std::vector<int>>& y,
                  const py::kwargs& params) {
    std::set<std::string> allowed;
    for (const auto& opt : cli::fit_options()) allowed.insert(opt.name);
    cli::RunConfig cfg("fit", allowed);
    cfg.set("method", method);
    for (const auto& [key, value] : params) {
        std::string name = py::str(key).cast<std::string>();
        std::replace(name.begin(), name.end(), '_', '-');
        cfg.set(name, setting_string(value));
    }
    const Dataset train = dataset_from(x, y);
    DetectorModel model;
    {
        py::gil_scoped_release release;
        model = build_detector(cli::dimensions_for(cfg, train)).fit(train);
    }
    return model;
}

const prob::KDEModel& as_kde(const DetectorModel& m) {
    const auto* kde = std::get_if<prob::KDEModel>(&m.model);
    if (!kde) throw Error(ErrorCode::InvalidConfig, "heatmaps need a kde model, got " + m.method());
    return *kde;
}

py::dict report_dict(const eval::EvalReport& r) {
    py::dict d;
    d["auroc"] = r.auroc;
    d["ap"] = r.ap;
    d["precision_at_k"] = r.precision_at_k;
    d["recall_at_k"] = r.recall_at_k;
    if (r.threshold) {
        d["tau"] = r.threshold->tau;
        d["alpha"] = r.threshold->alpha;
    }
    if (r.threshold_metrics) {
        d["false_alarm_rate"] = r.threshold_metrics->false_alarm_rate;
        d["miss_rate"] = r.threshold_metrics->miss_rate;
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "anoscope: anomaly detection toolkit";

    error_type = PyErr_NewException("anoscope._core.AnoscopeError", PyExc_ValueError, nullptr);
    m.attr("AnoscopeError") = py::handle(error_type);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = py::reinterpret_borrow<py::object>(error_type)(e.what());
            err.attr("code") = to_string(e.code());
            PyErr_SetObject(error_type, err.ptr());
        }
    });

    py::class_<DetectorModel>(m, "Model")
        .def("score", &DetectorModel::score_batch, py::arg("x"), "Scores per row; larger is more anomalous.")
        .def_property_readonly("method", &DetectorModel::method)
        .def_property_readonly("has_intrinsic_boundary", &DetectorModel::has_intrinsic_boundary)
        .def("save", [](const DetectorModel& self, const std::string& path) { checkpoint::save_model(path, self); },
             py::arg("path"))
        .def("__repr__", [](const DetectorModel& self) { return "<anoscope.Model " + self.method() + ">"; });

    m.def("fit", &fit, py::arg("method"), py::arg("x"), py::arg("labels") = py::none(),
          "Fits a detector by method tag. Keyword settings mirror the CLI fit flags "
          "(underscores for dashes), e.g. gamma=0.5, nu=0.1, hidden=[32, 32].");
    m.def("load", [](const std::string& path) { return checkpoint::load_model(path); }, py::arg("path"));

    m.def(
        "two_moons",
        [](Index n, std::uint64_t seed) {
            data::TwoMoonsConfig cfg;
            cfg.n_train = n;
            cfg.seed = seed;
            return data::gen_two_moons(cfg).rows;
        },
        py::arg("n") = 1000, py::arg("seed") = 0);
    m.def(
        "uniform_anomalies",
        [](Index m_count, std::uint64_t seed) { return data::sample_uniform_anomalies(data::two_moons_box(), m_count, seed).rows; },
        py::arg("m"), py::arg("seed") = 0, "Uniform points in the two-moons bounding box.");

    m.def(
        "calibrate_threshold",
        [](const Vector& scores, double alpha) { return core::calibrate_threshold(scores, alpha).tau; },
        py::arg("scores"), py::arg("alpha"));

    m.def(
        "auroc",
        [](const Vector& s, const std::vector<int>& y) { return eval::auroc(eval::LabeledScores::from(s, labels_from(y))); },
        py::arg("scores"), py::arg("labels"));
    m.def(
        "average_precision",
        [](const Vector& s, const std::vector<int>& y) {
            return eval::average_precision(eval::LabeledScores::from(s, labels_from(y)));
        },
        py::arg("scores"), py::arg("labels"));
    m.def(
        "evaluate",
        [](const Vector& s, const std::vector<int>& y, const std::vector<std::size_t>& ks, std::optional<double> tau) {
            std::optional<core::DecisionThreshold> th;
            if (tau) th = core::DecisionThreshold{*tau, 0.0};
            return report_dict(eval::evaluate(eval::LabeledScores::from(s, labels_from(y)), ks, th));
        },
        py::arg("scores"), py::arg("labels"), py::arg("ks") = std::vector<std::size_t>{10, 50, 100},
        py::arg("tau") = py::none());

    m.def(
        "kde_heatmaps",
        [](const DetectorModel& model, const Matrix& probes) {
            const auto maps = explain::lrp_heatmaps(as_kde(model), probes);
            Matrix out(static_cast<Index>(maps.size()), probes.cols());
            for (std::size_t i = 0; i < maps.size(); ++i) out.row(static_cast<Index>(i)) = maps[i].relevance.transpose();
            return out;
        },
        py::arg("model"), py::arg("probes"), "Per-feature relevance of the KDE score, one row per probe.");

    m.def(
        "bench_toy",
        [](std::uint64_t seed, bool include_deep) {
            bench::ToyBenchConfig cfg;
            cfg.seed = seed;
            cfg.include_deep = include_deep;
            bench::ToyBenchResult r;
            {
                py::gil_scoped_release release;
                r = bench::run_toy_benchmark(cfg);
            }
            py::dict out;
            for (const auto& row : r.rows) out[py::str(row.method)] = py::dict(py::arg("auroc") = row.auroc, py::arg("ap") = row.ap);
            return out;
        },
        py::arg("seed") = 7, py::arg("include_deep") = true);

    m.def(
        "read_csv",
        [](const std::string& path, std::optional<Index> label_column, bool flag_labels) {
            data::CsvOptions o;
            o.label_column = label_column;
            if (flag_labels) o.encoding = data::LabelEncoding::OutlierFlag;
            const Dataset d = data::load_csv(path, o);
            return py::make_tuple(d.rows, labels_to(d.labels));
        },
        py::arg("path"), py::arg("label_column") = py::none(), py::arg("flag_labels") = false);
}
