#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "dtwin/config.hpp"
#include "dtwin/errors.hpp"

using namespace dtwin;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
    try {
        config_from_json(j);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, DefaultsValidateAndRoundTrip) {
    const auto c = ExperimentConfig::defaults();
    EXPECT_NO_THROW(c.validate());
    const json j = to_json(c);
    EXPECT_EQ(to_json(config_from_json(j)), j);
    EXPECT_EQ(j.at("dataset").at("n"), 10000);
    EXPECT_EQ(j.at("network").at("layers"), json({6, 64, 128, 64, 5}));
    EXPECT_FALSE(c.smo.stop_on_convergence);
}

TEST(Config, MissingKeysKeepDefaults) {
    const auto c = config_from_json(json::parse(R"({"dataset": {"n": 500}, "smo": {"population": 20}})"));
    EXPECT_EQ(c.dataset.n, 500u);
    EXPECT_EQ(c.smo.population, 20);
    EXPECT_EQ(c.smo.max_iterations, 200);
    EXPECT_EQ(c.converter.L, 100e-6);
    EXPECT_EQ(to_json(config_from_json(json::object())), to_json(ExperimentConfig::defaults()));
}

TEST(Config, UnknownKeysAreRejectedWithTheirPath) {
    EXPECT_NE(error_of(json::parse(R"({"dataset": {"nope": 1}})")).find("dataset.nope"), std::string::npos);
    EXPECT_NE(error_of(json::parse(R"({"extra": true})")).find("extra"), std::string::npos);
    EXPECT_NE(error_of(json::parse(R"({"dataset": {"ranges": {"V_x": [1, 2]}}})")).find("V_x"), std::string::npos);
}

TEST(Config, TypeErrorsAndNulls) {
    EXPECT_NE(error_of(json::parse(R"({"smo": {"population": "forty"}})")).find("smo.population"), std::string::npos);
    EXPECT_NE(error_of(json::parse(R"({"converter": {"L": null}})")).find("converter.L"), std::string::npos);
    EXPECT_FALSE(error_of(json::parse(R"({"smo": {"stop_on_convergence": 1}})")).empty());
    EXPECT_FALSE(error_of(json::parse(R"({"dataset": {"n": -5}})")).empty());
    EXPECT_FALSE(error_of(json::parse(R"({"smo": {"population": 2.5}})")).empty());
    EXPECT_FALSE(error_of(json::parse(R"({"identification": {"params": ["L", "Q"]}})")).empty());
    EXPECT_FALSE(error_of(json::parse(R"({"dataset": {"ranges": {"V_in": [1]}}})")).empty());
    EXPECT_FALSE(error_of(json::parse("[1, 2]")).empty());
}

TEST(Config, ValidationCatchesBadValues) {
    auto c = ExperimentConfig::defaults();
    c.converter.D = 1.5;
    EXPECT_THROW(c.validate(), ValidationError);
    c = ExperimentConfig::defaults();
    c.network.layers = {5, 64, 5};
    c.network.dropout = {0.2};
    EXPECT_THROW(c.validate(), ValidationError);
    c = ExperimentConfig::defaults();
    c.bench.trials = 0;
    EXPECT_THROW(c.validate(), ValidationError);
    c = ExperimentConfig::defaults();
    c.identification.tol_factor = 0.5;
    EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Config, SeedDerivesEveryStream) {
    const auto a = ExperimentConfig::defaults().with_seed(5);
    const auto b = ExperimentConfig::defaults().with_seed(5);
    EXPECT_EQ(to_json(a), to_json(b));
    EXPECT_EQ(a.dataset.seed, derive_seed(5, 1));
    EXPECT_EQ(a.dataset.noise.seed, derive_seed(5, 2));
    EXPECT_EQ(a.smo.seed, derive_seed(5, 3));
    EXPECT_EQ(a.pso.seed, derive_seed(5, 4));
    EXPECT_EQ(a.train.seed, derive_seed(5, 5));
    EXPECT_EQ(a.forest.seed, derive_seed(5, 6));
    EXPECT_EQ(a.identification.noise_seed, derive_seed(5, 7));
    EXPECT_NE(to_json(a), to_json(ExperimentConfig::defaults().with_seed(6)));
}

TEST(Config, HashIsStableAndSensitive) {
    const auto c = ExperimentConfig::defaults();
    EXPECT_EQ(config_hash(c), config_hash(config_from_json(to_json(c))));
    EXPECT_EQ(config_hash(c).size(), 16u);
    auto d = c;
    d.smo.population = 41;
    EXPECT_NE(config_hash(c), config_hash(d));
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Config, DottedOverrides) {
    const auto c = apply_overrides(ExperimentConfig::defaults(),
                                   {"smo.population=20", "converter.L=8.2e-5", "output_dir=results",
                                    "identification.params=[\"L\",\"C\"]", "pso.stop_on_convergence=true"});
    EXPECT_EQ(c.smo.population, 20);
    EXPECT_EQ(c.converter.L, 8.2e-5);
    EXPECT_EQ(c.output_dir, "results");
    EXPECT_EQ(c.identification.params.size(), 2u);
    EXPECT_TRUE(c.pso.stop_on_convergence);
    EXPECT_THROW(apply_overrides(c, {"smo.nope=1"}), ValidationError);
    EXPECT_THROW(apply_overrides(c, {"smo.population"}), ValidationError);
    EXPECT_THROW(apply_overrides(c, {"smo.population=many"}), ValidationError);
}

TEST(Config, FileRoundTripAndErrors) {
    const auto dir = std::filesystem::temp_directory_path() / "dtwin_config_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "c.json").string();
    auto c = ExperimentConfig::defaults().with_seed(3);
    save_config(path, c);
    EXPECT_EQ(to_json(load_config(path)), to_json(c));
    EXPECT_THROW(load_config((dir / "missing.json").string()), IoError);
    std::ofstream(dir / "bad.json") << "{ not json";
    EXPECT_THROW(load_config((dir / "bad.json").string()), ValidationError);
    std::filesystem::remove_all(dir);
}
