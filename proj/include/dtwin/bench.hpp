#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtwin/config.hpp"

namespace dtwin {

/// SMO and PSO on one objective with the same population, iteration budget and
/// per-trial seeds.
struct Comparison {
    std::string benchmark;
    double tol = 0.0;             // success threshold on the best cost
    double reference_cost = 0.0;  // cost at the known optimum or planted point
    TrialSummary<double> smo;
    TrialSummary<double> pso;
    int smo_le_pso_pairs = 0;     // trials where SMO's final cost <= PSO's
};

struct RegimeMetrics {
    std::string regime;  // "synthetic" or "empirical"
    std::size_t n_test = 0;
    RegressionMetrics dnn;
    RegressionMetrics rf;
};

struct RippleEntry {
    std::string set;  // "planted", "smo" or "pso"
    ConverterParams params;
    std::optional<double> identification_cost;
    RippleMetrics ripple;
};

struct FailureCase {
    std::uint64_t record_id = 0;
    DegradationOutput truth;
    DegradationOutput predicted;
    double consumed_hours = 0.0;
    ComponentValues rates{};
    FailureReport report;
};

struct Provenance {
    std::string config_hash;
    std::string started;   // UTC, ISO 8601
    std::string finished;
    std::vector<std::pair<std::string, double>> stage_seconds;
};

struct BenchReport {
    std::vector<Comparison> suite;  // sphere, rastrigin, identification
    TrainHistory dnn_history;
    std::vector<RegimeMetrics> regression;
    std::vector<RippleEntry> ripple;
    std::optional<double> v_ripple_relative_difference;  // (pso - smo) / pso
    std::optional<double> i_ripple_relative_difference;
    FailureCase failure;
    Provenance provenance;

    const Comparison& comparison(const std::string& benchmark) const;
    const RegimeMetrics& regime(const std::string& name) const;
    const RippleEntry& ripple_set(const std::string& set) const;
};

using Progress = std::function<void(const std::string&)>;

/// Runs both optimizers for `trials` seeded trials each. The tolerance replaces
/// both configs' convergence_tol.
Comparison compare_optimizers(const std::string& name, const Objective<double>& f, const Bounds<double>& b,
                              double tol, double reference_cost, const ExperimentConfig& c);

/// The identification benchmark objective, bounds and the cost at the planted point.
struct IdentificationProblem {
    IdentificationSetup setup;
    SimTrace measured;
    Objective<double> objective;
    Bounds<double> bounds;
    double reference_cost = 0.0;
};
IdentificationProblem identification_problem(const ExperimentConfig& c);

/// DNN of the configured shape trained with the configured settings.
TrainResult train_dnn(const ExperimentConfig& c, const RegressionData& train, const RegressionData& validation);

/// Full pipeline. Each stage's errors are rethrown with the stage name prefixed.
BenchReport run_bench(const ExperimentConfig& c, const Progress& progress = {});

nlohmann::json report_json(const BenchReport& r, const ExperimentConfig& c);
/// benchmark,algorithm,trial,seed,iteration,best_cost
void write_convergence_csv(std::ostream& os, const BenchReport& r);
/// set,L,C,r_L,r_C,identification_cost,v_ripple_pp,i_ripple_pp,v_o_avg,i_L_avg,mode
void write_ripple_csv(std::ostream& os, const BenchReport& r);
/// regime,model,output,mse,r2
void write_metrics_csv(std::ostream& os, const BenchReport& r);

nlohmann::json metrics_json(const RegressionMetrics& m);  // {overall_mse, outputs: {name: {mse, r2}}}
nlohmann::json ripple_json(const RippleMetrics& r);
nlohmann::json component_json(const ComponentValues& v);
/// {t_failure_hours, first_failing, per_component, margins}, "inf" for no projected failure.
nlohmann::json failure_json(const FailureReport& f);

/// JSON number, or the strings "inf", "-inf", "nan" for non-finite values.
nlohmann::json json_number(double x);

}  // namespace dtwin
