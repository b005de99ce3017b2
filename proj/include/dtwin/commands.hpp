#pragma once

#include <string>
#include <vector>

#include "dtwin/bench.hpp"
#include "dtwin/config.hpp"

namespace dtwin {

/// Files of one command run. Each is written under a temporary name and renamed
/// into place by commit(); without a commit the temporaries are deleted, so a
/// failed run leaves neither partial nor clobbered outputs.
class OutputFiles {
public:
    explicit OutputFiles(std::string dir);
    ~OutputFiles();
    OutputFiles(const OutputFiles&) = delete;
    OutputFiles& operator=(const OutputFiles&) = delete;

    /// Temporary path to write `name` to.
    std::string add(const std::string& name);
    /// Final paths.
    std::vector<std::string> commit();

private:
    std::string dir_;
    std::vector<std::string> names_;
    bool committed_ = false;
};

enum class ModelKind { Dnn, Rf };
ModelKind parse_model(const std::string& s);
std::string to_string(ModelKind m);

/// Each command writes config.json next to its outputs and returns the final paths.

/// trace.csv and ripple.json for the configured converter and sim settings.
std::vector<std::string> cmd_simulate(const ExperimentConfig& c);
/// dataset.csv.
std::vector<std::string> cmd_synth(const ExperimentConfig& c);
/// identified.json and stats.json. Step size, horizon and initial state come from
/// the trace; the bounds are the configured fraction around the converter values.
std::vector<std::string> cmd_identify(const ExperimentConfig& c, const std::string& trace_path, Algorithm algorithm);
/// model.txt and metrics.json; trains on the train split, evaluates on the test split.
std::vector<std::string> cmd_train(const ExperimentConfig& c, const std::string& dataset_path, ModelKind model);
/// report.json, convergence.csv, ripple.csv and metrics.csv.
std::vector<std::string> cmd_bench(const ExperimentConfig& c, const Progress& progress = {});

/// Sim settings matching a recorded trace of converter `p`.
SimConfig sim_for_trace(const SimTrace& trace, const ConverterParams& p, int settle_periods);

}  // namespace dtwin
