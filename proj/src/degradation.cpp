#include "dtwin/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "dtwin/errors.hpp"
#include "dtwin/random.hpp"

namespace dtwin {

using detail::require;

StressInput StressInput::from_array(const std::array<double, kFields>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]};
}

StressRanges StressRanges::defaults() {
    StressRanges r;
    r.field = {{
        {5.0, 20.0},   // V_in
        {0.1, 5.0},    // I_in
        {0.3, 1.2},    // V_D
        {0.1, 5.0},    // I_D
        {0.1, 15.0},   // V_L
        {0.1, 5.0},    // I_L
        {2.0, 18.0},   // V_C
        {0.01, 2.0},   // I_C
        {2.0, 18.0},   // V_o
    }};
    return r;
}

void StressRanges::validate() const {
    for (std::size_t i = 0; i < field.size(); ++i) {
        const auto& f = field[i];
        require(std::isfinite(f.min) && std::isfinite(f.max) && f.min <= f.max,
                "StressRanges: invalid range for " + std::string(StressInput::kNames[i]));
    }
}

DegradationConstants DegradationConstants::calibrated(const StressRanges& ranges, double fraction) {
    ranges.validate();
    require(fraction > 0 && fraction < 1, "calibrated: fraction must lie in (0, 1)");
    const auto mx = [&](std::size_t a, std::size_t b) { return ranges.max_of(a) + ranges.max_of(b); };
    DegradationConstants k;
    const double s_in = mx(0, 1);
    const double s_d = mx(2, 3);
    const double s_l = mx(4, 5);
    const double s_c = mx(6, 7);
    require(s_in > 0 && s_d > 0 && s_l > 0 && s_c > 0, "calibrated: maximum stress must be positive");
    k.k_L = fraction * k.L0 / s_in;
    k.k_C = fraction * k.C0 / s_c;
    k.k_rL = fraction * k.r_L0 / s_l;
    k.k_rC = fraction * k.r_C0 / s_c;
    k.k_rds = fraction * k.r_ds0 / s_d;
    k.k_t = k.t0 / s_in;
    return k;
}

DegradationConstants DegradationConstants::defaults() {
    auto k = calibrated(StressRanges::defaults());
    k.k_L = 1.2e-6;
    return k;
}

void DegradationConstants::validate() const {
    require(L0 > 0 && C0 > 0 && r_L0 > 0 && r_C0 > 0 && r_ds0 > 0 && t0 > 0,
            "DegradationConstants: initial values must be > 0");
    require(k_L >= 0 && k_C >= 0 && k_rL >= 0 && k_rC >= 0 && k_rds >= 0 && k_t >= 0,
            "DegradationConstants: degradation constants must be >= 0");
    require(floor_fraction >= 0 && floor_fraction < 1, "DegradationConstants: floor_fraction must lie in [0, 1)");
}

DegradationOutput degrade(const StressInput& s, const DegradationConstants& k) {
    k.validate();
    DegradationOutput d;
    d.L = std::max(k.L0 - k.k_L * (s.V_in + s.I_in), k.L_floor());
    d.C = std::max(k.C0 - k.k_C * (s.V_C + s.I_C), k.C_floor());
    d.r_L = k.r_L0 + k.k_rL * (s.V_L + s.I_L);
    d.r_C = k.r_C0 + k.k_rC * (s.V_C + s.I_C);
    d.r_ds_on = k.r_ds0 + k.k_rds * (s.V_D + s.I_D);
    d.t_failure = std::clamp(k.t0 - k.k_t * (s.V_in + s.I_in), 0.0, k.t0);
    return d;
}

std::vector<StressInput> sample_stress(const StressRanges& ranges, std::uint64_t seed, std::size_t n) {
    ranges.validate();
    require(n >= 1, "sample_stress: n must be >= 1");
    Rng rng(seed);
    std::vector<StressInput> out;
    out.reserve(n);
    std::array<double, StressInput::kFields> a{};
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = uniform(rng, ranges.field[i].min, ranges.field[i].max);
        out.push_back(StressInput::from_array(a));
    }
    return out;
}

NoiseSpec NoiseSpec::zero() {
    NoiseSpec s;
    s.sigma_voltage = s.sigma_current = s.sigma_L = s.sigma_C = 0.0;
    s.sigma_r_L = s.sigma_r_C = s.sigma_r_ds = s.sigma_t = 0.0;
    return s;
}

void NoiseSpec::validate() const {
    for (double v : {sigma_voltage, sigma_current, sigma_L, sigma_C, sigma_r_L, sigma_r_C, sigma_r_ds, sigma_t}) {
        require(std::isfinite(v) && v >= 0, "NoiseSpec: sigmas must be finite and >= 0");
    }
}

DegradationRecord add_noise(const DegradationRecord& record, const NoiseSpec& spec,
                            const DegradationConstants& floors) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, record.id));
    DegradationRecord out = record;
    auto& s = out.input;
    for (double* v : {&s.V_in, &s.V_D, &s.V_L, &s.V_C, &s.V_o}) *v += gaussian(rng, spec.sigma_voltage);
    for (double* v : {&s.I_in, &s.I_D, &s.I_L, &s.I_C}) *v += gaussian(rng, spec.sigma_current);

    auto& d = out.output;
    d.L = std::max(d.L + gaussian(rng, spec.sigma_L), floors.L_floor());
    d.C = std::max(d.C + gaussian(rng, spec.sigma_C), floors.C_floor());
    d.r_L = std::max(d.r_L + gaussian(rng, spec.sigma_r_L), 0.0);
    d.r_C = std::max(d.r_C + gaussian(rng, spec.sigma_r_C), 0.0);
    d.r_ds_on = std::max(d.r_ds_on + gaussian(rng, spec.sigma_r_ds), 0.0);
    d.t_failure = std::clamp(d.t_failure + gaussian(rng, spec.sigma_t), 0.0, floors.t0);
    return out;
}

std::string to_string(Stratum s) {
    switch (s) {
        case Stratum::EarlyLife: return "early-life";
        case Stratum::MidLife: return "mid-life";
        case Stratum::EndOfLife: return "end-of-life";
    }
    return "?";
}

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Validation: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

Stratum parse_stratum(std::string_view s) {
    if (s == "early-life") return Stratum::EarlyLife;
    if (s == "mid-life") return Stratum::MidLife;
    if (s == "end-of-life") return Stratum::EndOfLife;
    throw ValidationError("unknown stratum '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Validation;
    if (s == "test") return Split::Test;
    throw ValidationError("unknown split '" + std::string(s) + "'");
}

std::vector<std::pair<DegradationRecord, Split>> DatasetSplit::all() const {
    std::vector<std::pair<DegradationRecord, Split>> out;
    out.reserve(size());
    for (const auto& r : train) out.emplace_back(r, Split::Train);
    for (const auto& r : validation) out.emplace_back(r, Split::Validation);
    for (const auto& r : test) out.emplace_back(r, Split::Test);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first.id < b.first.id; });
    return out;
}

namespace {

// Largest-remainder apportionment of `total` across groups proportional to `sizes`.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<std::size_t>& sizes) {
    const double n = static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}));
    std::vector<std::size_t> out(sizes.size());
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t used = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        const double exact = static_cast<double>(total) * static_cast<double>(sizes[g]) / n;
        out[g] = static_cast<std::size_t>(std::floor(exact));
        used += out[g];
        rem.emplace_back(exact - std::floor(exact), g);
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; used < total; ++j, ++used) ++out[rem[j % rem.size()].second];
    return out;
}

}  // namespace

DatasetSplit generate_dataset(const DatasetConfig& cfg) {
    require(cfg.n >= 10, "generate_dataset: n must be >= 10");
    require(cfg.train_fraction > 0 && cfg.validation_fraction >= 0 &&
                cfg.train_fraction + cfg.validation_fraction < 1,
            "generate_dataset: split fractions must leave a nonempty test share");
    cfg.constants.validate();
    cfg.noise.validate();

    const auto stress = sample_stress(cfg.ranges, derive_seed(cfg.seed, 0), cfg.n);

    // Strata: tertiles of the clean V_in + I_in, the argument of the L and t_failure laws.
    std::vector<std::size_t> order(cfg.n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return stress[a].V_in + stress[a].I_in < stress[b].V_in + stress[b].I_in;
    });
    std::vector<Stratum> stratum(cfg.n);
    for (std::size_t rank = 0; rank < cfg.n; ++rank) {
        const std::size_t t = rank * 3 / cfg.n;
        stratum[order[rank]] = static_cast<Stratum>(t);
    }

    std::vector<DegradationRecord> records(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        DegradationRecord r;
        r.id = i;
        r.input = stress[i];
        r.output = degrade(stress[i], cfg.constants);
        r.stratum = stratum[i];
        records[i] = add_noise(r, cfg.noise, cfg.constants);
    }

    const auto n_train = static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(cfg.n)));
    const auto n_val = static_cast<std::size_t>(std::llround(cfg.validation_fraction * static_cast<double>(cfg.n)));
    require(n_train + n_val < cfg.n, "generate_dataset: test split would be empty");

    std::array<std::vector<std::size_t>, 3> members;
    for (std::size_t i = 0; i < cfg.n; ++i) members[static_cast<std::size_t>(stratum[i])].push_back(i);
    Rng rng(derive_seed(cfg.seed, 2));
    for (auto& m : members) std::shuffle(m.begin(), m.end(), rng);

    const std::vector<std::size_t> sizes = {members[0].size(), members[1].size(), members[2].size()};
    const auto train_k = apportion(n_train, sizes);
    const auto val_k = apportion(n_val, sizes);

    DatasetSplit out;
    for (std::size_t g = 0; g < 3; ++g) {
        require(train_k[g] + val_k[g] <= sizes[g], "generate_dataset: stratum too small to split");
        for (std::size_t j = 0; j < sizes[g]; ++j) {
            const auto& r = records[members[g][j]];
            if (j < train_k[g]) out.train.push_back(r);
            else if (j < train_k[g] + val_k[g]) out.validation.push_back(r);
            else out.test.push_back(r);
        }
    }
    const auto by_id = [](const DegradationRecord& a, const DegradationRecord& b) { return a.id < b.id; };
    std::sort(out.train.begin(), out.train.end(), by_id);
    std::sort(out.validation.begin(), out.validation.end(), by_id);
    std::sort(out.test.begin(), out.test.end(), by_id);
    return out;
}

static constexpr const char* kDatasetHeader =
    "id,V_in,I_in,V_D,I_D,V_L,I_L,V_C,I_C,V_o,L,C,r_L,r_C,r_ds_on,t_failure,stratum,split";

void write_dataset_csv(std::ostream& os, const DatasetSplit& data) {
    os << kDatasetHeader << '\n' << std::setprecision(17);
    for (const auto& [r, split] : data.all()) {
        os << r.id;
        for (double v : r.input.as_array()) os << ',' << v;
        const auto& d = r.output;
        os << ',' << d.L << ',' << d.C << ',' << d.r_L << ',' << d.r_C << ',' << d.r_ds_on << ',' << d.t_failure
           << ',' << to_string(r.stratum) << ',' << to_string(split) << '\n';
    }
}

void write_dataset_csv(const std::string& path, const DatasetSplit& data) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    write_dataset_csv(os, data);
    if (!os) throw IoError("write failed: " + path);
}

DatasetSplit read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("dataset CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(line == kDatasetHeader, "dataset CSV: unexpected header");

    DatasetSplit out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        require(cells.size() == 18, "dataset CSV: expected 18 fields on line " + std::to_string(lineno));
        try {
            DegradationRecord r;
            r.id = std::stoull(cells[0]);
            std::array<double, StressInput::kFields> a{};
            for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::stod(cells[1 + i]);
            r.input = StressInput::from_array(a);
            r.output = {std::stod(cells[10]), std::stod(cells[11]), std::stod(cells[12]),
                        std::stod(cells[13]), std::stod(cells[14]), std::stod(cells[15])};
            r.stratum = parse_stratum(cells[16]);
            switch (parse_split(cells[17])) {
                case Split::Train: out.train.push_back(r); break;
                case Split::Validation: out.validation.push_back(r); break;
                case Split::Test: out.test.push_back(r); break;
            }
        } catch (const std::logic_error&) {
            throw ValidationError("dataset CSV: bad number on line " + std::to_string(lineno));
        }
    }
    return out;
}

DatasetSplit read_dataset_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    return read_dataset_csv(is);
}

void ThermalRamp::validate() const {
    require(T_end > T_start, "ThermalRamp: T_end must exceed T_start");
    require(duration > 0, "ThermalRamp: duration must be > 0");
    require(acceleration_factor >= 1, "ThermalRamp: acceleration_factor must be >= 1");
}

double ThermalRamp::temperature(double t) const {
    validate();
    require(t >= 0 && t <= duration, "ThermalRamp: t outside [0, duration]");
    return T_start + (T_end - T_start) * t / duration;
}

double ThermalRamp::aged_hours(double t) const {
    validate();
    require(t >= 0 && t <= duration, "ThermalRamp: t outside [0, duration]");
    return t * acceleration_factor / 60.0;
}

}  // namespace dtwin
