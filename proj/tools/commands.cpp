#include "commands.hpp"
#include "methods.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "anoscope/bench.hpp"
#include "anoscope/checkpoint.hpp"
#include "anoscope/core.hpp"
#include "anoscope/data.hpp"
#include "anoscope/detector.hpp"
#include "anoscope/eval.hpp"
#include "anoscope/explain.hpp"

namespace anoscope::cli {

namespace {

// ---- shared helpers ---------------------------------------------------------------

// "none", "last" or a zero-based column index.
std::optional<Index> label_column(const RunConfig& cfg, const std::string& path, const std::string& fallback) {
    const std::string spec = cfg.get("labels-col", fallback);
    if (spec == "none") return std::nullopt;
    if (spec == "last") {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::MissingFile, path);
        std::string header;
        std::getline(in, header);
        return static_cast<Index>(std::count(header.begin(), header.end(), ','));
    }
    char* end = nullptr;
    const long long c = std::strtoll(spec.c_str(), &end, 10);
    if (spec.empty() || *end != '\0' || c < 0) {
        throw Error(ErrorCode::ConfigError, "--labels-col expects none, last or a column index, got '" + spec + "'");
    }
    return static_cast<Index>(c);
}

Dataset load_input(const RunConfig& cfg, const std::string& key, const std::string& label_fallback = "none") {
    const std::string path = cfg.require(key);
    data::CsvOptions opts;
    opts.label_column = label_column(cfg, path, label_fallback);
    const std::string enc = cfg.get("encoding", "signed");
    if (enc == "flag") opts.encoding = data::LabelEncoding::OutlierFlag;
    else if (enc != "signed") throw Error(ErrorCode::ConfigError, "--encoding expects signed or flag");
    return data::load_csv(path, opts);
}

void write_text(const RunConfig& cfg, const std::string& text) {
    const std::string out = cfg.get("out", "");
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw Error(ErrorCode::IOError, "cannot open '" + out + "' for writing");
    f << text;
    if (!f) throw Error(ErrorCode::IOError, "failed writing '" + out + "'");
}

// ---- generate ---------------------------------------------------------------------

int run_generate(const RunConfig& cfg) {
    const std::string toy = cfg.get("toy", "two-moons");
    const Index n = cfg.integer("n", 1000);
    const Index m = cfg.integer("anomalies", 0);
    const std::uint64_t seed = seed_of(cfg);
    Dataset out;
    if (toy == "two-moons") {
        data::TwoMoonsConfig c;
        c.n_train = n;
        c.seed = seed;
        out = data::gen_two_moons(c);
        if (m > 0) {
            std::fill(out.labels.begin(), out.labels.end(), Label::Normal);
            out.append(data::sample_uniform_anomalies(data::two_moons_box(), m, seed + 1));
        }
    } else if (toy == "uniform") {
        out = data::sample_uniform_anomalies(data::two_moons_box(), n, seed);
    } else {
        throw Error(ErrorCode::ConfigError, "--toy expects two-moons or uniform");
    }
    data::save_csv(cfg.require("out"), out);
    return 0;
}

// ---- fit ----------------------------------------------------------------------------

int run_fit(const RunConfig& cfg) {
    const Dataset train = load_input(cfg, "in");
    const auto model = build_detector(dimensions_for(cfg, train)).fit(train);
    checkpoint::save_model(cfg.require("out"), model);
    return 0;
}

// ---- score --------------------------------------------------------------------------

std::string score_csv(const Vector& scores, const std::vector<Label>& labels) {
    std::ostringstream out;
    out << "row_id,score,label\n";
    char buf[64];
    for (Index i = 0; i < scores.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", scores(i));
        out << i << ',' << buf << ',' << data::label_to_cell(labels[static_cast<std::size_t>(i)]) << '\n';
    }
    return out.str();
}

int run_score(const RunConfig& cfg) {
    const auto model = checkpoint::load_model(cfg.require("model"));
    const Dataset x = load_input(cfg, "in");
    write_text(cfg, score_csv(model.score_batch(x.rows), x.labels));
    return 0;
}

// ---- eval ---------------------------------------------------------------------------

struct ScoreFile {
    Vector scores;
    std::vector<Label> labels;
};

ScoreFile load_scores(const std::string& path) {
    data::CsvOptions opts;
    opts.label_column = 2;
    const Dataset d = data::load_csv(path, opts);
    if (d.dim() != 2) throw Error(ErrorCode::ParseError, path + ": expected row_id,score,label columns");
    return {d.rows.col(1), d.labels};
}

int run_eval(const RunConfig& cfg) {
    const ScoreFile s = load_scores(cfg.require("in"));
    std::optional<core::DecisionThreshold> threshold;
    if (const auto alpha = cfg.number("alpha")) {
        const Vector cal = cfg.has("calibration") ? load_scores(cfg.get("calibration", "")).scores : s.scores;
        threshold = core::calibrate_threshold(cal, *alpha);
    } else if (const auto tau = cfg.number("tau")) {
        threshold = core::DecisionThreshold{*tau, 0.0};
    }
    std::vector<std::size_t> ks;
    for (double k : number_list("k", cfg.get("k", "10,50,100"))) ks.push_back(static_cast<std::size_t>(k));
    const auto report = eval::evaluate(eval::LabeledScores::from(s.scores, s.labels), ks, threshold);
    const std::string format = cfg.get("format", "json");
    if (format == "json") write_text(cfg, eval::to_json(report) + "\n");
    else if (format == "csv") write_text(cfg, eval::to_csv(report));
    else throw Error(ErrorCode::ConfigError, "--format expects json or csv");
    return 0;
}

// ---- explain ------------------------------------------------------------------------

int run_explain(const RunConfig& cfg) {
    const auto model = checkpoint::load_model(cfg.require("model"));
    const auto* kde = std::get_if<prob::KDEModel>(&model.model);
    if (!kde) throw Error(ErrorCode::InvalidArgument, "explain needs a kde model, got " + model.method());
    const Dataset probes = load_input(cfg, "in");
    const std::string target = cfg.get("target", "points");
    if (target != "points" && target != "probe") throw Error(ErrorCode::ConfigError, "--target expects points or probe");
    const auto maps = explain::lrp_heatmaps(
        *kde, probes.rows, target == "probe" ? explain::GradientTarget::Probe : explain::GradientTarget::TrainingPoints);
    explain::write_heatmaps_csv(cfg.require("out"), maps);
    if (cfg.has("pgm")) {
        const Index w = cfg.integer("width", 0);
        const Index h = cfg.integer("height", 0);
        for (std::size_t i = 0; i < maps.size(); ++i) {
            const std::string path = cfg.get("pgm", "") + "_" + std::to_string(i) + ".pgm";
            std::ofstream f(path, std::ios::binary);
            if (!f) throw Error(ErrorCode::IOError, "cannot open '" + path + "' for writing");
            explain::write_pgm(f, maps[i].relevance, w, h);
        }
    }
    return 0;
}

// ---- bench-toy ----------------------------------------------------------------------

int run_bench_toy(const RunConfig& cfg) {
    bench::ToyBenchConfig c;
    c.seed = static_cast<std::uint64_t>(cfg.integer("seed", 7));
    c.include_deep = !cfg.flag("no-deep");
    std::ostringstream out;
    bench::write_toy_table(out, bench::run_toy_benchmark(c));
    write_text(cfg, out.str());
    return 0;
}

// ---- thyroid-pipeline ---------------------------------------------------------------

int run_thyroid(const RunConfig& cfg) {
    RunConfig c = cfg;
    if (!c.has("in") && c.has("data")) c.set("in", c.get("data", ""));
    const Dataset data = load_input(c, "in", "last");
    bench::ThyroidConfig t;
    t.nu = cfg.number("nu", 0.15);
    t.seed = seed_of(cfg);
    t.robust_scaling = !cfg.flag("no-scaling");
    const auto r = bench::run_thyroid_pipeline(data, t);
    nlohmann::ordered_json j;
    j["nu"] = t.nu;
    j["gamma"] = r.gamma;
    j["gamma_index"] = r.gamma_index;
    j["gamma_at_grid_edge"] = r.at_grid_edge;
    j["val_auroc"] = r.val_auroc;
    j["test"] = nlohmann::ordered_json::parse(eval::to_json(r.test));
    write_text(cfg, j.dump(2) + "\n");
    return 0;
}

}  // namespace

const std::vector<CommandSpec>& commands() {
    static const std::vector<CommandSpec> table = {
        {"generate",
         "Write a toy dataset as CSV",
         {{"toy", "two-moons or uniform"},
          {"n", "number of rows"},
          {"anomalies", "append this many labeled uniform anomalies"},
          {"seed", "random seed"},
          {"out", "output CSV"}},
         run_generate},
        {"fit",
         "Fit a detector and write a checkpoint",
         fit_options(),
         run_fit},
        {"score",
         "Score a CSV with a checkpoint (row_id,score,label)",
         {{"model", "checkpoint path"},
          {"in", "input CSV"},
          {"out", "output CSV (stdout when absent)"},
          {"labels-col", "none, last or zero-based label column"},
          {"encoding", "label encoding: signed or flag"}},
         run_score},
        {"eval",
         "Evaluate a score CSV",
         {{"in", "score CSV from the score command"},
          {"out", "report path (stdout when absent)"},
          {"format", "json or csv"},
          {"alpha", "calibrate a threshold at this false-alarm level"},
          {"calibration", "score CSV used for calibration (defaults to --in)"},
          {"tau", "fixed threshold instead of --alpha"},
          {"k", "precision/recall cutoffs, comma separated"}},
         run_eval},
        {"explain",
         "Relevance heatmaps for a KDE checkpoint",
         {{"model", "kde checkpoint"},
          {"in", "probe CSV"},
          {"out", "heatmap CSV"},
          {"labels-col", "none, last or zero-based label column"},
          {"encoding", "label encoding: signed or flag"},
          {"target", "gradient target: points or probe"},
          {"pgm", "also write <prefix>_<i>.pgm per probe"},
          {"width", "PGM width"},
          {"height", "PGM height"}},
         run_explain},
        {"bench-toy",
         "Two-moons benchmark table over all methods",
         {{"seed", "random seed"}, {"out", "output CSV (stdout when absent)"}, {"no-deep", "skip ae and dsvdd"}},
         run_bench_toy},
        {"thyroid-pipeline",
         "Scale, split 60:10:30, select gamma for OC-SVM, report on test",
         {{"in", "thyroid CSV"},
          {"data", "alias for --in"},
          {"labels-col", "label column (default: last)"},
          {"encoding", "label encoding: signed or flag"},
          {"nu", "OC-SVM nu"},
          {"seed", "split seed"},
          {"no-scaling", "skip robust scaling"},
          {"out", "report path (stdout when absent)"}},
         run_thyroid},
    };
    return table;
}

}  // namespace anoscope::cli
