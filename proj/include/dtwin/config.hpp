#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtwin/converter.hpp"
#include "dtwin/degradation.hpp"
#include "dtwin/failure.hpp"
#include "dtwin/features.hpp"
#include "dtwin/forest.hpp"
#include "dtwin/identification.hpp"
#include "dtwin/regression.hpp"
#include "dtwin/swarm.hpp"

namespace dtwin {

/// Identification benchmark: the converter's own parameters are planted, the measured
/// trace is the simulated start-up record plus Gaussian channel noise, and a trial
/// succeeds once its cost is within `tol_factor` of the cost of the planted point.
struct IdentificationBench {
    SimConfig sim = IdentificationSetup::defaults().sim;
    std::vector<Param> params = {Param::L, Param::C, Param::r_L, Param::r_C};
    int time_exponent = 2;
    double bounds_fraction = 0.5;
    double noise_sigma_v = 0.01;  // V
    double noise_sigma_i = 0.01;  // A
    std::uint64_t noise_seed = 99;
    double tol_factor = 1.05;

    IdentificationSetup setup(const ConverterParams& converter) const;
    void validate(const ConverterParams& converter) const;
};

struct BenchSettings {
    int trials = 20;
    int dimension = 4;              // sphere and Rastrigin
    double sphere_half_width = 5.0;
    double rastrigin_half_width = 5.12;
    double analytic_tol = 1e-4;
    int empirical_records = 20;     // test records pushed through identification, 0 to skip
    int empirical_iterations = 100;

    void validate() const;
};

struct NetworkShape {
    std::vector<int> layers = kDefaultLayers;
    std::vector<double> dropout = kDefaultDropout;

    void validate() const;
};

struct ExperimentConfig {
    ConverterParams converter;
    SimConfig sim = SimConfig::defaults_for(ConverterParams{});
    DatasetConfig dataset;
    FeatureProbe probe = FeatureProbe::defaults();
    IdentificationBench identification;
    SmoConfig smo;
    PsoConfig pso;
    NetworkShape network;
    TrainConfig train;  // train.seed also seeds the weight initialisation
    ForestConfig forest;
    FailureThresholds thresholds;
    BenchSettings bench;
    std::string output_dir = "out";

    /// Library defaults, except that the optimizers run their full iteration budget.
    static ExperimentConfig defaults();
    void validate() const;

    /// Every seed in the config derived from one base seed.
    ExperimentConfig with_seed(std::uint64_t seed) const;

    OptimizerSpec optimizer(Algorithm a) const;
};

nlohmann::json to_json(const ExperimentConfig& c);

/// Missing keys keep their defaults; unknown keys, nulls and type mismatches raise
/// ValidationError.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Applies "dotted.key=value" assignments, value parsed as JSON (bare words are
/// taken as strings). The key must already exist in the config.
ExperimentConfig apply_overrides(const ExperimentConfig& c, const std::vector<std::string>& assignments);

ExperimentConfig load_config(const std::string& path);
void save_config(const std::string& path, const ExperimentConfig& c);

/// 64-bit FNV-1a of the compact JSON form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace dtwin
