#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dtwin/commands.hpp"
#include "dtwin/errors.hpp"

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> overrides;
};

dtwin::ExperimentConfig resolve(const Globals& g) {
    dtwin::ExperimentConfig c = g.config_path.empty() ? dtwin::ExperimentConfig::defaults()
                                                      : dtwin::load_config(g.config_path);
    if (g.seed) c = c.with_seed(*g.seed);
    c = dtwin::apply_overrides(c, g.overrides);
    if (!g.out.empty()) c.output_dir = g.out;
    c.validate();
    return c;
}

void report(const std::vector<std::string>& files) {
    for (const auto& f : files) std::cout << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Buck converter digital twin: simulation, degradation data, identification, regression, bench"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "JSON config file; missing keys take defaults");
    app.add_option("--seed", g.seed, "derive every seed in the config from this one");
    app.add_option("--out", g.out, "output directory (overrides output_dir)");
    app.add_option("--set", g.overrides, "override a config value, e.g. --set converter.D=0.4")->take_all();

    auto* simulate = app.add_subcommand("simulate", "simulate the converter, write trace.csv and ripple.json");
    auto* synth = app.add_subcommand("synth", "generate the degradation dataset, write dataset.csv");

    auto* identify = app.add_subcommand("identify", "identify L, C, r_L, r_C from a measured trace");
    std::string trace_path;
    std::string algorithm = "smo";
    identify->add_option("--trace", trace_path, "measured trace CSV (t,v_o,i_L,v_C,mode)")->required();
    identify->add_option("--algorithm", algorithm, "smo or pso")->check(CLI::IsMember({"smo", "pso"}));

    auto* train = app.add_subcommand("train", "train a regressor on a dataset CSV");
    std::string data_path;
    std::string model = "dnn";
    train->add_option("--data", data_path, "dataset CSV written by synth")->required();
    train->add_option("--model", model, "dnn or rf")->check(CLI::IsMember({"dnn", "rf"}));

    auto* bench = app.add_subcommand("bench", "run the full comparison bench");
    bool quiet = false;
    bench->add_flag("--quiet", quiet, "no progress messages");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const dtwin::ExperimentConfig c = resolve(g);
        if (*simulate) report(dtwin::cmd_simulate(c));
        if (*synth) report(dtwin::cmd_synth(c));
        if (*identify) report(dtwin::cmd_identify(c, trace_path, dtwin::parse_algorithm(algorithm)));
        if (*train) report(dtwin::cmd_train(c, data_path, dtwin::parse_model(model)));
        if (*bench) {
            const auto progress = [&](const std::string& stage) {
                if (!quiet) std::cerr << "bench: " << stage << '\n';
            };
            report(dtwin::cmd_bench(c, progress));
        }
    } catch (const dtwin::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const dtwin::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const dtwin::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
