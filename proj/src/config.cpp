#include "dtwin/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>
#include <type_traits>

#include "dtwin/errors.hpp"
#include "dtwin/random.hpp"

namespace dtwin {

using detail::require;
using nlohmann::json;

// Field lists shared by the encoder and the decoder.

template <class V> void fields(ConverterParams& p, V&& v) {
    v("L", p.L); v("C", p.C); v("r_L", p.r_L); v("r_C", p.r_C); v("r_ds_on", p.r_ds_on);
    v("V_in", p.V_in); v("R_load", p.R_load); v("f_sw", p.f_sw); v("D", p.D); v("V_diode", p.V_diode);
}

template <class V> void fields(SimConfig& s, V&& v) {
    v("dt", s.dt); v("n_periods", s.n_periods); v("settle_periods", s.settle_periods);
    v("i_L0", s.i_L0); v("v_C0", s.v_C0);
}

template <class V> void fields(StressRanges& r, V&& v) {
    for (std::size_t i = 0; i < StressInput::kFields; ++i) v(StressInput::kNames[i], r.field[i]);
}

template <class V> void fields(DegradationConstants& k, V&& v) {
    v("L0", k.L0); v("C0", k.C0); v("r_L0", k.r_L0); v("r_C0", k.r_C0); v("r_ds0", k.r_ds0); v("t0", k.t0);
    v("k_L", k.k_L); v("k_C", k.k_C); v("k_rL", k.k_rL); v("k_rC", k.k_rC); v("k_rds", k.k_rds);
    v("k_t", k.k_t); v("floor_fraction", k.floor_fraction);
}

template <class V> void fields(NoiseSpec& n, V&& v) {
    v("sigma_voltage", n.sigma_voltage); v("sigma_current", n.sigma_current); v("sigma_L", n.sigma_L);
    v("sigma_C", n.sigma_C); v("sigma_r_L", n.sigma_r_L); v("sigma_r_C", n.sigma_r_C);
    v("sigma_r_ds", n.sigma_r_ds); v("sigma_t", n.sigma_t); v("seed", n.seed);
}

template <class V> void fields(DatasetConfig& d, V&& v) {
    v("n", d.n); v("seed", d.seed); v("train_fraction", d.train_fraction);
    v("validation_fraction", d.validation_fraction); v("ranges", d.ranges); v("constants", d.constants);
    v("noise", d.noise);
}

template <class V> void fields(FeatureProbe& p, V&& v) { v("operating", p.operating); v("sim", p.sim); }

template <class V> void fields(IdentificationBench& b, V&& v) {
    v("sim", b.sim); v("params", b.params); v("time_exponent", b.time_exponent);
    v("bounds_fraction", b.bounds_fraction); v("noise_sigma_v", b.noise_sigma_v);
    v("noise_sigma_i", b.noise_sigma_i); v("noise_seed", b.noise_seed); v("tol_factor", b.tol_factor);
}

template <class V> void fields(SmoConfig& c, V&& v) {
    v("population", c.population); v("max_groups", c.max_groups); v("pr_min", c.pr_min); v("pr_max", c.pr_max);
    v("local_leader_limit", c.local_leader_limit); v("global_leader_limit", c.global_leader_limit);
    v("max_iterations", c.max_iterations); v("convergence_tol", c.convergence_tol);
    v("stop_on_convergence", c.stop_on_convergence); v("seed", c.seed);
}

template <class V> void fields(PsoConfig& c, V&& v) {
    v("population", c.population); v("inertia", c.inertia); v("c1", c.c1); v("c2", c.c2);
    v("max_iterations", c.max_iterations); v("convergence_tol", c.convergence_tol);
    v("stop_on_convergence", c.stop_on_convergence); v("seed", c.seed);
}

template <class V> void fields(NetworkShape& n, V&& v) { v("layers", n.layers); v("dropout", n.dropout); }

template <class V> void fields(TrainConfig& c, V&& v) {
    v("learning_rate", c.learning_rate); v("batch_size", c.batch_size); v("max_epochs", c.max_epochs);
    v("validation_fraction", c.validation_fraction); v("beta1", c.beta1); v("beta2", c.beta2);
    v("epsilon", c.epsilon); v("seed", c.seed); v("normalize", c.normalize);
}

template <class V> void fields(ForestConfig& c, V&& v) {
    v("n_trees", c.n_trees); v("max_depth", c.max_depth); v("min_samples_leaf", c.min_samples_leaf);
    v("bootstrap", c.bootstrap); v("seed", c.seed);
}

template <class V> void fields(FailureThresholds& t, V&& v) {
    v("c_drop_fraction", t.c_drop_fraction); v("l_drop_fraction", t.l_drop_fraction);
    v("r_l_growth_fraction", t.r_l_growth_fraction); v("r_c_growth_fraction", t.r_c_growth_fraction);
    v("r_ds_growth_fraction", t.r_ds_growth_fraction);
}

template <class V> void fields(BenchSettings& b, V&& v) {
    v("trials", b.trials); v("dimension", b.dimension); v("sphere_half_width", b.sphere_half_width);
    v("rastrigin_half_width", b.rastrigin_half_width); v("analytic_tol", b.analytic_tol);
    v("empirical_records", b.empirical_records); v("empirical_iterations", b.empirical_iterations);
}

template <class V> void fields(ExperimentConfig& c, V&& v) {
    v("converter", c.converter); v("sim", c.sim); v("dataset", c.dataset); v("probe", c.probe);
    v("identification", c.identification); v("smo", c.smo); v("pso", c.pso); v("network", c.network);
    v("train", c.train); v("forest", c.forest); v("thresholds", c.thresholds); v("bench", c.bench);
    v("output_dir", c.output_dir);
}

namespace {

template <class T>
concept Record = requires(T& t) { fields(t, [](std::string_view, auto&) {}); };

template <class T>
json encode(const T& x) {
    if constexpr (Record<T>) {
        json j = json::object();
        T copy = x;
        fields(copy, [&](std::string_view k, auto& f) { j[std::string(k)] = encode(f); });
        return j;
    } else if constexpr (std::is_same_v<T, FieldRange>) {
        return json::array({x.min, x.max});
    } else if constexpr (std::is_same_v<T, std::vector<Param>>) {
        json j = json::array();
        for (Param p : x) j.push_back(to_string(p));
        return j;
    } else {
        return json(x);
    }
}

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw ValidationError("config: " + path + ": " + what);
}

template <class T>
void decode(const json& j, T& x, const std::string& path) {
    if constexpr (Record<T>) {
        if (!j.is_object()) bad(path, "expected an object");
        std::set<std::string, std::less<>> known;
        fields(x, [&](std::string_view k, auto& f) {
            known.emplace(k);
            const auto it = j.find(std::string(k));
            if (it != j.end()) decode(*it, f, path.empty() ? std::string(k) : path + "." + std::string(k));
        });
        for (const auto& [k, _] : j.items())
            if (!known.contains(k)) bad(path.empty() ? k : path + "." + k, "unknown key");
    } else if constexpr (std::is_same_v<T, bool>) {
        if (!j.is_boolean()) bad(path, "expected true or false");
        x = j.get<bool>();
    } else if constexpr (std::is_same_v<T, int>) {
        if (!j.is_number_integer()) bad(path, "expected an integer");
        const auto v = j.get<std::int64_t>();
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) bad(path, "out of range");
        x = static_cast<int>(v);
    } else if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::size_t>) {
        if (!j.is_number_unsigned()) bad(path, "expected a non-negative integer");
        x = static_cast<T>(j.get<std::uint64_t>());
    } else if constexpr (std::is_same_v<T, double>) {
        if (!j.is_number()) bad(path, "expected a number");
        x = j.get<double>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!j.is_string()) bad(path, "expected a string");
        x = j.get<std::string>();
    } else if constexpr (std::is_same_v<T, FieldRange>) {
        if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
            bad(path, "expected [min, max]");
        x = {j[0].get<double>(), j[1].get<double>()};
    } else if constexpr (std::is_same_v<T, std::vector<Param>>) {
        if (!j.is_array()) bad(path, "expected an array of parameter names");
        x.clear();
        for (const auto& e : j) {
            if (!e.is_string()) bad(path, "expected an array of parameter names");
            x.push_back(parse_param(e.get<std::string>()));
        }
    } else {
        if (!j.is_array()) bad(path, "expected an array");
        T out;
        for (std::size_t i = 0; i < j.size(); ++i) {
            typename T::value_type e{};
            decode(j[i], e, path + "[" + std::to_string(i) + "]");
            out.push_back(e);
        }
        x = std::move(out);
    }
}

}  // namespace

IdentificationSetup IdentificationBench::setup(const ConverterParams& converter) const {
    IdentificationSetup s;
    s.fixed = converter;
    s.sim = sim;
    s.params = params;
    s.time_exponent = time_exponent;
    return s;
}

void IdentificationBench::validate(const ConverterParams& converter) const {
    sim.validate(converter);
    require(!params.empty(), "identification: no parameters to identify");
    require(time_exponent >= 0, "identification: time_exponent must be >= 0");
    require(bounds_fraction > 0.0 && bounds_fraction < 1.0, "identification: bounds_fraction must lie in (0, 1)");
    require(noise_sigma_v >= 0.0 && noise_sigma_i >= 0.0, "identification: noise sigmas must be >= 0");
    require(tol_factor >= 1.0, "identification: tol_factor must be >= 1");
}

void BenchSettings::validate() const {
    require(trials >= 1, "bench: trials must be >= 1");
    require(dimension >= 1, "bench: dimension must be >= 1");
    require(sphere_half_width > 0.0 && rastrigin_half_width > 0.0, "bench: half widths must be > 0");
    require(analytic_tol >= 0.0, "bench: analytic_tol must be >= 0");
    require(empirical_records >= 0, "bench: empirical_records must be >= 0");
    require(empirical_iterations >= 1, "bench: empirical_iterations must be >= 1");
}

void NetworkShape::validate() const {
    require(layers.size() >= 2, "network: need at least an input and an output layer");
    require(layers.front() == static_cast<int>(kFeatureNames.size()), "network: input layer must have 6 units");
    require(layers.back() == static_cast<int>(kTargetNames.size()), "network: output layer must have 5 units");
    zero_mlp<double>(layers, dropout.empty() ? std::vector<double>(layers.size() - 2, 0.0) : dropout);
}

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig c;
    c.smo.stop_on_convergence = false;
    c.pso.stop_on_convergence = false;
    return c;
}

void ExperimentConfig::validate() const {
    converter.validate();
    sim.validate(converter);
    dataset.ranges.validate();
    dataset.constants.validate();
    dataset.noise.validate();
    require(dataset.n >= 10, "dataset: n must be >= 10");
    require(dataset.train_fraction > 0 && dataset.validation_fraction >= 0 &&
                dataset.train_fraction + dataset.validation_fraction < 1,
            "dataset: split fractions must leave a nonempty test share");
    probe.validate();
    identification.validate(converter);
    smo.validate();
    pso.validate();
    network.validate();
    train.validate();
    forest.validate();
    thresholds.validate();
    bench.validate();
    require(!output_dir.empty(), "output_dir must not be empty");
}

ExperimentConfig ExperimentConfig::with_seed(std::uint64_t seed) const {
    ExperimentConfig c = *this;
    c.dataset.seed = derive_seed(seed, 1);
    c.dataset.noise.seed = derive_seed(seed, 2);
    c.smo.seed = derive_seed(seed, 3);
    c.pso.seed = derive_seed(seed, 4);
    c.train.seed = derive_seed(seed, 5);
    c.forest.seed = derive_seed(seed, 6);
    c.identification.noise_seed = derive_seed(seed, 7);
    return c;
}

OptimizerSpec ExperimentConfig::optimizer(Algorithm a) const {
    OptimizerSpec s;
    s.algorithm = a;
    s.smo = smo;
    s.pso = pso;
    return s;
}

json to_json(const ExperimentConfig& c) { return encode(c); }

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c = ExperimentConfig::defaults();
    decode(j, c, "");
    return c;
}

ExperimentConfig apply_overrides(const ExperimentConfig& c, const std::vector<std::string>& assignments) {
    json j = to_json(c);
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + a + "' is not key=value");
        const std::string key = a.substr(0, eq);
        const std::string text = a.substr(eq + 1);
        json* node = &j;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot - start);
            if (!node->is_object() || !node->contains(part)) throw ValidationError("override: unknown key " + key);
            node = &(*node)[part];
            if (dot == std::string::npos) break;
            start = dot + 1;
        }
        json value = json::parse(text, nullptr, false);
        if (value.is_discarded()) value = text;
        *node = std::move(value);
    }
    return config_from_json(j);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config(const std::string& path, const ExperimentConfig& c) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << to_json(c).dump(2) << '\n';
    if (!os) throw IoError("write failed: " + path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const ExperimentConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
    return buf;
}

}  // namespace dtwin
