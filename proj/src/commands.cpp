#include "dtwin/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dtwin/errors.hpp"

namespace dtwin {

namespace fs = std::filesystem;
using detail::require;
using nlohmann::json;

namespace {

constexpr const char* kPartial = ".partial";

void write_json(const std::string& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << j.dump(2) << '\n';
    if (!os) throw IoError("write failed: " + path);
}

template <class F>
void write_text(const std::string& path, F&& f) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    f(os);
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace

OutputFiles::OutputFiles(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory " + dir_);
}

OutputFiles::~OutputFiles() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& n : names_) fs::remove(fs::path(dir_) / (n + kPartial), ec);
}

std::string OutputFiles::add(const std::string& name) {
    names_.push_back(name);
    return (fs::path(dir_) / (name + kPartial)).string();
}

std::vector<std::string> OutputFiles::commit() {
    std::vector<std::string> out;
    for (const auto& n : names_) {
        const fs::path final_path = fs::path(dir_) / n;
        std::error_code ec;
        fs::rename(fs::path(dir_) / (n + kPartial), final_path, ec);
        if (ec) throw IoError("cannot move output into place: " + final_path.string());
        out.push_back(final_path.string());
    }
    committed_ = true;
    return out;
}

ModelKind parse_model(const std::string& s) {
    if (s == "dnn") return ModelKind::Dnn;
    if (s == "rf") return ModelKind::Rf;
    throw ValidationError("unknown model '" + s + "' (expected dnn or rf)");
}

std::string to_string(ModelKind m) { return m == ModelKind::Dnn ? "dnn" : "rf"; }

SimConfig sim_for_trace(const SimTrace& trace, const ConverterParams& p, int settle_periods) {
    trace.validate();
    SimConfig s;
    s.dt = trace.dt();
    const double steps = p.period() / s.dt;
    const auto per = static_cast<Eigen::Index>(std::llround(steps));
    require(per >= 100 && std::abs(steps - static_cast<double>(per)) <= 1e-6 * steps,
            "trace step does not divide the switching period into >= 100 steps");
    require(trace.size() % per == 0, "trace does not hold a whole number of switching periods");
    s.dt = p.period() / static_cast<double>(per);
    s.n_periods = static_cast<int>(trace.size() / per);
    s.settle_periods = std::clamp(settle_periods, 0, s.n_periods - 1);
    s.i_L0 = trace.i_L[0];
    s.v_C0 = trace.v_C[0];
    s.validate(p);
    return s;
}

std::vector<std::string> cmd_simulate(const ExperimentConfig& c) {
    c.validate();
    OutputFiles out(c.output_dir);
    const SimTrace trace = simulate(c.converter, c.sim);
    const RippleMetrics m = measure_ripple(trace, c.sim);
    write_trace_csv(out.add("trace.csv"), trace);
    json ripple = ripple_json(m);
    ripple["schema"] = "dtwin-ripple";
    ripple["version"] = 1;
    ripple["periodicity"] = steady_state_periodicity(trace, c.sim);
    write_json(out.add("ripple.json"), ripple);
    save_config(out.add("config.json"), c);
    return out.commit();
}

std::vector<std::string> cmd_synth(const ExperimentConfig& c) {
    c.validate();
    OutputFiles out(c.output_dir);
    write_dataset_csv(out.add("dataset.csv"), generate_dataset(c.dataset));
    save_config(out.add("config.json"), c);
    return out.commit();
}

std::vector<std::string> cmd_identify(const ExperimentConfig& c, const std::string& trace_path, Algorithm algorithm) {
    c.validate();
    const SimTrace measured = read_trace_csv(trace_path);
    OutputFiles out(c.output_dir);
    IdentificationSetup setup = c.identification.setup(c.converter);
    setup.sim = sim_for_trace(measured, c.converter, c.identification.sim.settle_periods);
    const Bounds<double> bounds = relative_bounds(setup, c.converter, c.identification.bounds_fraction);
    const OptimizerSpec spec = c.optimizer(algorithm);
    const IdentificationResult r = identify_parameters(measured, setup, bounds, spec);

    json params = json::object(), box = json::object();
    for (std::size_t k = 0; k < setup.params.size(); ++k) {
        const std::string name = to_string(setup.params[k]);
        params[name] = get(r.params, setup.params[k]);
        box[name] = {bounds.lower[static_cast<Eigen::Index>(k)], bounds.upper[static_cast<Eigen::Index>(k)]};
    }
    write_json(out.add("identified.json"), {{"schema", "dtwin-identified"},
                                            {"version", 1},
                                            {"algorithm", to_string(algorithm)},
                                            {"params", params},
                                            {"bounds", box},
                                            {"cost", json_number(r.optimization.best.cost)}});

    const auto& s = r.optimization.stats;
    json history = json::array();
    for (double v : s.best_cost_history) history.push_back(json_number(v));
    write_json(out.add("stats.json"), {{"schema", "dtwin-trial-stats"},
                                       {"version", 1},
                                       {"algorithm", to_string(algorithm)},
                                       {"seed", spec.seed()},
                                       {"success", s.success},
                                       {"iterations", s.iterations_used},
                                       {"iterations_to_tol", s.iterations_to_tol},
                                       {"violations", s.constraint_violations},
                                       {"evaluations", s.evaluations},
                                       {"best_cost", json_number(r.optimization.best.cost)},
                                       {"history", history}});
    save_config(out.add("config.json"), c);
    return out.commit();
}

std::vector<std::string> cmd_train(const ExperimentConfig& c, const std::string& dataset_path, ModelKind model) {
    c.validate();
    const DatasetSplit data = read_dataset_csv(dataset_path);
    require(!data.train.empty() && !data.test.empty(), "dataset needs nonempty train and test splits");
    OutputFiles out(c.output_dir);
    const RegressionData train_set = synthetic_regression_data(data.train, c.probe);
    const RegressionData validation_set = synthetic_regression_data(data.validation, c.probe);
    const RegressionData test_set = synthetic_regression_data(data.test, c.probe);

    Mat predicted;
    json history = nullptr;
    if (model == ModelKind::Dnn) {
        const TrainResult t = train_dnn(c, train_set, validation_set);
        write_checkpoint(out.add("model.txt"), t.model);
        predicted = t.model.predict(test_set.X);
        json tl = json::array(), vl = json::array();
        for (double v : t.history.train_loss) tl.push_back(json_number(v));
        for (double v : t.history.validation_loss) vl.push_back(json_number(v));
        history = {{"best_epoch", t.history.best_epoch}, {"train_loss", tl}, {"validation_loss", vl}};
    } else {
        const RandomForest f = rf_train(train_set, c.forest);
        write_forest(out.add("model.txt"), f);
        predicted = f.predict(test_set.X);
    }
    const RegressionMetrics m = evaluate(test_set.Y, predicted);
    write_json(out.add("metrics.json"), {{"schema", "dtwin-train-metrics"},
                                         {"version", 1},
                                         {"model", to_string(model)},
                                         {"n_train", data.train.size()},
                                         {"n_validation", data.validation.size()},
                                         {"n_test", data.test.size()},
                                         {"overall_mse", json_number(m.overall_mse)},
                                         {"outputs", metrics_json(m)["outputs"]},
                                         {"history", history}});
    save_config(out.add("config.json"), c);
    return out.commit();
}

std::vector<std::string> cmd_bench(const ExperimentConfig& c, const Progress& progress) {
    c.validate();
    OutputFiles out(c.output_dir);
    const BenchReport r = run_bench(c, progress);
    write_json(out.add("report.json"), report_json(r, c));
    write_text(out.add("convergence.csv"), [&](std::ostream& os) { write_convergence_csv(os, r); });
    write_text(out.add("ripple.csv"), [&](std::ostream& os) { write_ripple_csv(os, r); });
    write_text(out.add("metrics.csv"), [&](std::ostream& os) { write_metrics_csv(os, r); });
    save_config(out.add("config.json"), c);
    return out.commit();
}

}  // namespace dtwin
