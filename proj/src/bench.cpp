#include "dtwin/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <ostream>

#include "dtwin/errors.hpp"
#include "dtwin/random.hpp"

namespace dtwin {

using detail::require;
using nlohmann::json;

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

template <class F>
auto in_stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw ValidationError(name + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(name + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError(name + ": " + e.what());
    }
}

DegradationOutput from_targets(const Vec& y) { return {y[0], y[1], y[2], y[3], y[4], 0.0}; }

std::size_t best_trial(const TrialSummary<double>& s) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < s.trials.size(); ++i)
        if (s.trials[i].result.best.cost < s.trials[k].result.best.cost) k = i;
    return k;
}

std::optional<double> relative_difference(double smo, double pso) {
    if (pso == 0.0) return std::nullopt;
    return (pso - smo) / pso;
}

json optional_number(const std::optional<double>& x) { return x ? json_number(*x) : json(nullptr); }

json params_json(const ConverterParams& p) {
    return {{"L", p.L}, {"C", p.C}, {"r_L", p.r_L}, {"r_C", p.r_C}, {"r_ds_on", p.r_ds_on}};
}

json degradation_json(const DegradationOutput& d) {
    return {{"L", d.L}, {"C", d.C}, {"r_L", d.r_L}, {"r_C", d.r_C}, {"r_ds_on", d.r_ds_on}};
}

json summary_json(const TrialSummary<double>& s) {
    json trials = json::array();
    for (const auto& t : s.trials) {
        json history = json::array();
        for (double v : t.result.stats.best_cost_history) history.push_back(json_number(v));
        trials.push_back({{"trial", t.trial},
                          {"seed", t.seed},
                          {"success", t.result.stats.success},
                          {"iterations", t.result.stats.iterations_used},
                          {"iterations_to_tol", t.result.stats.iterations_to_tol},
                          {"violations", t.result.stats.constraint_violations},
                          {"evaluations", t.result.stats.evaluations},
                          {"best_cost", json_number(t.result.best.cost)},
                          {"history", std::move(history)}});
    }
    return {{"algorithm", to_string(s.algorithm)},
            {"success_rate", s.success_rate},
            {"mean_iterations", s.mean_iterations_to_tol},
            {"violations", s.total_violations},
            {"evaluations", s.total_evaluations},
            {"trials", std::move(trials)}};
}

// Empirical regime: each test device is measured at the identification operating
// point, its L, C, r_L and r_C are identified by SMO, and the probe averages are
// read from the device itself.
RegressionData empirical_data(const ExperimentConfig& c, const std::vector<DegradationRecord>& records) {
    const IdentificationSetup setup = c.identification.setup(c.converter);
    const Bounds<double> bounds = relative_bounds(setup, c.converter, c.identification.bounds_fraction);
    RegressionData d;
    d.X.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(kFeatureNames.size()));
    d.Y.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(kTargetNames.size()));
    for (std::size_t k = 0; k < records.size(); ++k) {
        const DegradationOutput& truth = records[k].output;
        ConverterParams device = c.converter;
        device.L = truth.L;
        device.C = truth.C;
        device.r_L = truth.r_L;
        device.r_C = truth.r_C;
        device.r_ds_on = truth.r_ds_on;
        const SimTrace measured =
            add_measurement_noise(simulate(device, setup.sim), c.identification.noise_sigma_v,
                                  c.identification.noise_sigma_i, derive_seed(c.identification.noise_seed, records[k].id));
        OptimizerSpec spec = c.optimizer(Algorithm::SMO);
        spec.smo.max_iterations = c.bench.empirical_iterations;
        spec.smo.seed = derive_seed(c.smo.seed, 1000 + records[k].id);
        const auto found = identify_parameters(measured, setup, bounds, spec).params;
        DegradationOutput estimate = truth;
        estimate.L = found.L;
        estimate.C = found.C;
        estimate.r_L = found.r_L;
        estimate.r_C = found.r_C;
        const auto i = static_cast<Eigen::Index>(k);
        d.X.row(i) = feature_vector(estimate, probe(truth, c.probe)).transpose();
        d.Y.row(i) = target_vector(truth).transpose();
    }
    return d;
}

RippleEntry ripple_for(const std::string& set, const ExperimentConfig& c, const ConverterParams& p,
                       std::optional<double> cost) {
    return {set, p, cost, measure_ripple(simulate(p, c.sim), c.sim)};
}

}  // namespace

json json_number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

json metrics_json(const RegressionMetrics& m) {
    json outputs = json::object();
    for (std::size_t k = 0; k < m.mse.size(); ++k)
        outputs[std::string(kTargetNames[k])] = {{"mse", json_number(m.mse[k])},
                                                 {"r2", m.r2[k] ? json_number(*m.r2[k]) : json(nullptr)}};
    return {{"overall_mse", json_number(m.overall_mse)}, {"outputs", std::move(outputs)}};
}

json ripple_json(const RippleMetrics& r) {
    return {{"v_ripple_pp", r.v_ripple_pp},
            {"i_ripple_pp", r.i_ripple_pp},
            {"v_o_avg", r.v_o_avg},
            {"i_L_avg", r.i_L_avg},
            {"mode", to_string(r.mode)}};
}

json component_json(const ComponentValues& v) {
    json j = json::object();
    for (std::size_t i = 0; i < kComponents.size(); ++i) j[to_string(kComponents[i])] = json_number(v[i]);
    return j;
}

json failure_json(const FailureReport& f) {
    return {{"t_failure_hours", json_number(f.t_failure)},
            {"first_failing", f.first_failing ? json(to_string(*f.first_failing)) : json(nullptr)},
            {"per_component", component_json(f.time_to_failure)},
            {"margins", component_json(f.margin)}};
}

const Comparison& BenchReport::comparison(const std::string& benchmark) const {
    for (const auto& c : suite)
        if (c.benchmark == benchmark) return c;
    throw ValidationError("report has no benchmark " + benchmark);
}

const RegimeMetrics& BenchReport::regime(const std::string& name) const {
    for (const auto& r : regression)
        if (r.regime == name) return r;
    throw ValidationError("report has no regression regime " + name);
}

const RippleEntry& BenchReport::ripple_set(const std::string& set) const {
    for (const auto& r : ripple)
        if (r.set == set) return r;
    throw ValidationError("report has no ripple set " + set);
}

Comparison compare_optimizers(const std::string& name, const Objective<double>& f, const Bounds<double>& b,
                              double tol, double reference_cost, const ExperimentConfig& c) {
    Comparison out;
    out.benchmark = name;
    out.tol = tol;
    out.reference_cost = reference_cost;
    OptimizerSpec smo = c.optimizer(Algorithm::SMO);
    OptimizerSpec pso = c.optimizer(Algorithm::PSO);
    smo.smo.convergence_tol = pso.pso.convergence_tol = tol;
    out.smo = run_trials(f, b, smo, c.bench.trials);
    out.pso = run_trials(f, b, pso, c.bench.trials);
    for (int k = 0; k < c.bench.trials; ++k)
        out.smo_le_pso_pairs += out.smo.trials[k].result.best.cost <= out.pso.trials[k].result.best.cost ? 1 : 0;
    return out;
}

IdentificationProblem identification_problem(const ExperimentConfig& c) {
    IdentificationProblem p;
    p.setup = c.identification.setup(c.converter);
    p.measured = add_measurement_noise(simulate(c.converter, p.setup.sim), c.identification.noise_sigma_v,
                                       c.identification.noise_sigma_i, c.identification.noise_seed);
    p.objective = identification_objective(p.measured, p.setup);
    p.bounds = relative_bounds(p.setup, c.converter, c.identification.bounds_fraction);
    p.reference_cost = p.objective(p.setup.extract(c.converter));
    require(std::isfinite(p.reference_cost), "identification: planted point has a non-finite cost");
    return p;
}

TrainResult train_dnn(const ExperimentConfig& c, const RegressionData& train, const RegressionData& validation) {
    return dtwin::train(init_mlp<double>(c.network.layers, c.train.seed, c.network.dropout), train, validation, c.train);
}

BenchReport run_bench(const ExperimentConfig& c, const Progress& progress) {
    c.validate();
    BenchReport r;
    r.provenance.config_hash = config_hash(c);
    r.provenance.started = utc_now();
    const auto note = [&](const std::string& s) {
        if (progress) progress(s);
    };
    const auto timed = [&](const std::string& name, auto&& f) {
        note(name);
        const auto t0 = std::chrono::steady_clock::now();
        in_stage(name, f);
        r.provenance.stage_seconds.emplace_back(
            name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    };

    timed("analytic", [&] {
        const auto dim = static_cast<Eigen::Index>(c.bench.dimension);
        const double s = c.bench.sphere_half_width;
        const double q = c.bench.rastrigin_half_width;
        r.suite.push_back(compare_optimizers("sphere", sphere<double>, {Vec::Constant(dim, -s), Vec::Constant(dim, s)},
                                             c.bench.analytic_tol, 0.0, c));
        r.suite.push_back(compare_optimizers("rastrigin", rastrigin<double>,
                                             {Vec::Constant(dim, -q), Vec::Constant(dim, q)}, c.bench.analytic_tol,
                                             0.0, c));
        return 0;
    });

    IdentificationProblem problem;
    timed("identification", [&] {
        problem = identification_problem(c);
        r.suite.push_back(compare_optimizers("identification", problem.objective, problem.bounds,
                                             c.identification.tol_factor * problem.reference_cost,
                                             problem.reference_cost, c));
        return 0;
    });

    timed("ripple", [&] {
        const Comparison& id = r.comparison("identification");
        r.ripple.push_back(ripple_for("planted", c, c.converter, problem.reference_cost));
        for (const auto* s : {&id.smo, &id.pso}) {
            const auto& best = s->trials[best_trial(*s)].result.best;
            const std::string set = s == &id.smo ? "smo" : "pso";
            r.ripple.push_back(ripple_for(set, c, problem.setup.embed(best.position), best.cost));
        }
        r.v_ripple_relative_difference =
            relative_difference(r.ripple_set("smo").ripple.v_ripple_pp, r.ripple_set("pso").ripple.v_ripple_pp);
        r.i_ripple_relative_difference =
            relative_difference(r.ripple_set("smo").ripple.i_ripple_pp, r.ripple_set("pso").ripple.i_ripple_pp);
        return 0;
    });

    DatasetSplit data;
    RegressionData train_set, validation_set, test_set;
    timed("dataset", [&] {
        data = generate_dataset(c.dataset);
        train_set = synthetic_regression_data(data.train, c.probe);
        validation_set = synthetic_regression_data(data.validation, c.probe);
        test_set = synthetic_regression_data(data.test, c.probe);
        return 0;
    });

    DnnRegressor dnn;
    timed("dnn", [&] {
        TrainResult t = train_dnn(c, train_set, validation_set);
        dnn = std::move(t.model);
        r.dnn_history = std::move(t.history);
        return 0;
    });

    RandomForest rf;
    timed("rf", [&] {
        rf = rf_train(train_set, c.forest);
        return 0;
    });

    timed("regression", [&] {
        r.regression.push_back(
            {"synthetic", data.test.size(), evaluate(test_set.Y, dnn.predict(test_set.X)), evaluate(test_set.Y, rf.predict(test_set.X))});
        return 0;
    });

    if (c.bench.empirical_records > 0) {
        timed("empirical", [&] {
            const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(c.bench.empirical_records), data.test.size());
            const std::vector<DegradationRecord> subset(data.test.begin(), data.test.begin() + static_cast<long>(n));
            const RegressionData e = empirical_data(c, subset);
            r.regression.push_back({"empirical", n, evaluate(e.Y, dnn.predict(e.X)), evaluate(e.Y, rf.predict(e.X))});
            return 0;
        });
    }

    timed("failure", [&] {
        // The most stressed held-out device stands in for an aged unit in service.
        const auto it = std::max_element(data.test.begin(), data.test.end(), [](const auto& a, const auto& b) {
            return a.input.V_in + a.input.I_in < b.input.V_in + b.input.I_in;
        });
        FailureCase& f = r.failure;
        f.record_id = it->id;
        f.truth = it->output;
        const RegressionData one = synthetic_regression_data({*it}, c.probe);
        f.predicted = from_targets(dnn.predict(Vec(one.X.row(0).transpose())));
        f.consumed_hours = std::max(0.0, c.dataset.constants.k_t * (it->input.V_in + it->input.I_in));
        f.rates = rates_from_consumed_life(f.predicted, c.dataset.constants, f.consumed_hours);
        f.report = time_to_failure(f.predicted, c.dataset.constants, f.rates, c.thresholds);
        f.predicted.t_failure = f.report.t_failure;
        return 0;
    });

    r.provenance.finished = utc_now();
    return r;
}

json report_json(const BenchReport& r, const ExperimentConfig& c) {
    json suite = json::object();
    for (const auto& cmp : r.suite)
        suite[cmp.benchmark] = {{"tol", json_number(cmp.tol)},
                                {"reference_cost", json_number(cmp.reference_cost)},
                                {"smo_le_pso_pairs", cmp.smo_le_pso_pairs},
                                {"trials", c.bench.trials},
                                {"smo", summary_json(cmp.smo)},
                                {"pso", summary_json(cmp.pso)}};

    json regression = json::object();
    for (const auto& m : r.regression)
        regression[m.regime] = {{"n_test", m.n_test}, {"dnn", metrics_json(m.dnn)}, {"rf", metrics_json(m.rf)}};
    json train_loss = json::array(), validation_loss = json::array();
    for (double v : r.dnn_history.train_loss) train_loss.push_back(json_number(v));
    for (double v : r.dnn_history.validation_loss) validation_loss.push_back(json_number(v));
    regression["dnn_history"] = {
        {"best_epoch", r.dnn_history.best_epoch}, {"train_loss", train_loss}, {"validation_loss", validation_loss}};

    json ripple = json::object();
    json sets = json::object();
    for (const auto& e : r.ripple) {
        json s = ripple_json(e.ripple);
        s["params"] = params_json(e.params);
        s["identification_cost"] = optional_number(e.identification_cost);
        sets[e.set] = std::move(s);
    }
    ripple["sets"] = std::move(sets);
    ripple["v_ripple_relative_difference"] = optional_number(r.v_ripple_relative_difference);
    ripple["i_ripple_relative_difference"] = optional_number(r.i_ripple_relative_difference);

    const FailureCase& f = r.failure;
    json failure = failure_json(f.report);
    failure["record_id"] = f.record_id;
    failure["truth"] = degradation_json(f.truth);
    failure["predicted"] = degradation_json(f.predicted);
    failure["consumed_hours"] = json_number(f.consumed_hours);
    failure["rates"] = component_json(f.rates);

    json stages = json::object();
    for (const auto& [name, secs] : r.provenance.stage_seconds) stages[name] = secs;
    json provenance = {{"config_hash", r.provenance.config_hash},
                       {"started", r.provenance.started},
                       {"finished", r.provenance.finished},
                       {"stage_seconds", std::move(stages)},
                       {"trials", c.bench.trials},
                       {"seeds",
                        {{"smo", c.smo.seed},
                         {"pso", c.pso.seed},
                         {"dataset", c.dataset.seed},
                         {"dataset_noise", c.dataset.noise.seed},
                         {"measurement_noise", c.identification.noise_seed},
                         {"train", c.train.seed},
                         {"forest", c.forest.seed}}}};

    return {{"schema", "dtwin-report"},
            {"version", 1},
            {"smo_vs_pso", std::move(suite)},
            {"regression", std::move(regression)},
            {"ripple", std::move(ripple)},
            {"failure", std::move(failure)},
            {"provenance", std::move(provenance)}};
}

void write_convergence_csv(std::ostream& os, const BenchReport& r) {
    os << std::setprecision(17) << "benchmark,algorithm,trial,seed,iteration,best_cost\n";
    for (const auto& cmp : r.suite)
        for (const auto* s : {&cmp.smo, &cmp.pso})
            for (const auto& t : s->trials) {
                const auto& h = t.result.stats.best_cost_history;
                for (std::size_t i = 0; i < h.size(); ++i)
                    os << cmp.benchmark << ',' << to_string(s->algorithm) << ',' << t.trial << ',' << t.seed << ','
                       << i + 1 << ',' << h[i] << '\n';
            }
}

void write_ripple_csv(std::ostream& os, const BenchReport& r) {
    os << std::setprecision(17)
       << "set,L,C,r_L,r_C,identification_cost,v_ripple_pp,i_ripple_pp,v_o_avg,i_L_avg,mode\n";
    for (const auto& e : r.ripple) {
        os << e.set << ',' << e.params.L << ',' << e.params.C << ',' << e.params.r_L << ',' << e.params.r_C << ',';
        if (e.identification_cost) os << *e.identification_cost;
        os << ',' << e.ripple.v_ripple_pp << ',' << e.ripple.i_ripple_pp << ',' << e.ripple.v_o_avg << ','
           << e.ripple.i_L_avg << ',' << to_string(e.ripple.mode) << '\n';
    }
}

void write_metrics_csv(std::ostream& os, const BenchReport& r) {
    os << std::setprecision(17) << "regime,model,output,mse,r2\n";
    for (const auto& m : r.regression)
        for (const auto& [model, metrics] : {std::pair{"dnn", &m.dnn}, std::pair{"rf", &m.rf}})
            for (std::size_t k = 0; k < metrics->mse.size(); ++k) {
                os << m.regime << ',' << model << ',' << kTargetNames[k] << ',' << metrics->mse[k] << ',';
                if (metrics->r2[k]) os << *metrics->r2[k];
                os << '\n';
            }
}

}  // namespace dtwin
