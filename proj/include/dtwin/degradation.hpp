#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dtwin {

/// Measured electrical stress, one sample of the converter's operating state.
struct StressInput {
    double V_in = 0.0;
    double I_in = 0.0;
    double V_D = 0.0;
    double I_D = 0.0;
    double V_L = 0.0;
    double I_L = 0.0;
    double V_C = 0.0;
    double I_C = 0.0;
    double V_o = 0.0;

    static constexpr std::size_t kFields = 9;
    static constexpr std::array<std::string_view, kFields> kNames = {"V_in", "I_in", "V_D", "I_D", "V_L",
                                                                    "I_L",  "V_C",  "I_C", "V_o"};
    std::array<double, kFields> as_array() const { return {V_in, I_in, V_D, I_D, V_L, I_L, V_C, I_C, V_o}; }
    static StressInput from_array(const std::array<double, kFields>& a);

    friend bool operator==(const StressInput&, const StressInput&) = default;
};

struct DegradationOutput {
    double L = 0.0;
    double C = 0.0;
    double r_L = 0.0;
    double r_C = 0.0;
    double r_ds_on = 0.0;
    double t_failure = 0.0;  // hours

    friend bool operator==(const DegradationOutput&, const DegradationOutput&) = default;
};

struct FieldRange {
    double min = 0.0;
    double max = 0.0;
};

struct StressRanges {
    std::array<FieldRange, StressInput::kFields> field{};

    /// V_in 5-20 V and I_L 0.1-5 A; the other seven fields are plausible spans for
    /// the nominal converter, not measured values.
    static StressRanges defaults();
    void validate() const;
    double max_of(std::size_t i) const { return field[i].max; }
};

struct DegradationConstants {
    double L0 = 100e-6;
    double C0 = 220e-6;
    double r_L0 = 0.1;
    double r_C0 = 0.05;
    double r_ds0 = 0.25;
    double t0 = 1000.0;  // hours
    double k_L = 0.0;
    double k_C = 0.0;
    double k_rL = 0.0;
    double k_rC = 0.0;
    double k_rds = 0.0;
    double k_t = 0.0;
    /// L and C never fall below this fraction of nominal.
    double floor_fraction = 0.10;

    /// Constants that move every parameter by `fraction` of nominal at the maximum
    /// stress of `ranges` and drive t_failure from t0 to zero.
    static DegradationConstants calibrated(const StressRanges& ranges, double fraction = 0.25);
    /// calibrated(StressRanges::defaults()) with k_L pinned to 1.2 uH per unit stress.
    static DegradationConstants defaults();
    void validate() const;

    double L_floor() const { return floor_fraction * L0; }
    double C_floor() const { return floor_fraction * C0; }
    DegradationOutput nominal() const { return {L0, C0, r_L0, r_C0, r_ds0, t0}; }
};

/// Linear stress-to-degradation map with floors on L, C and t_failure.
DegradationOutput degrade(const StressInput& s, const DegradationConstants& k);

std::vector<StressInput> sample_stress(const StressRanges& ranges, std::uint64_t seed, std::size_t n);

struct NoiseSpec {
    double sigma_voltage = 0.05;   // V
    double sigma_current = 0.05;   // A
    double sigma_L = 0.3e-6;       // H
    double sigma_C = 0.3e-6;       // F
    double sigma_r_L = 1e-3;       // Ohm, 1 % of nominal
    double sigma_r_C = 0.5e-3;     // Ohm
    double sigma_r_ds = 2.5e-3;    // Ohm
    double sigma_t = 1.0;          // hours
    std::uint64_t seed = 7;

    static NoiseSpec zero();
    void validate() const;
};

enum class Stratum : std::uint8_t { EarlyLife, MidLife, EndOfLife };
enum class Split : std::uint8_t { Train, Validation, Test };

std::string to_string(Stratum s);
std::string to_string(Split s);
Stratum parse_stratum(std::string_view s);
Split parse_split(std::string_view s);

struct DegradationRecord {
    std::uint64_t id = 0;
    StressInput input;
    DegradationOutput output;
    Stratum stratum = Stratum::EarlyLife;

    friend bool operator==(const DegradationRecord&, const DegradationRecord&) = default;
};

/// Independent zero-mean Gaussian perturbation of every field, then floors
/// re-applied. The stream is derived from (spec.seed, record.id).
DegradationRecord add_noise(const DegradationRecord& record, const NoiseSpec& spec,
                            const DegradationConstants& floors = DegradationConstants::defaults());

struct DatasetConfig {
    std::size_t n = 10000;
    StressRanges ranges = StressRanges::defaults();
    DegradationConstants constants = DegradationConstants::defaults();
    NoiseSpec noise;
    std::uint64_t seed = 42;
    double train_fraction = 0.70;
    double validation_fraction = 0.15;
};

struct DatasetSplit {
    std::vector<DegradationRecord> train;
    std::vector<DegradationRecord> validation;
    std::vector<DegradationRecord> test;

    std::size_t size() const { return train.size() + validation.size() + test.size(); }
    /// All records ordered by id, each tagged with its split.
    std::vector<std::pair<DegradationRecord, Split>> all() const;
};

/// sample_stress -> degrade -> add_noise, strata from tertiles of clean V_in + I_in,
/// then a stratified train/validation/test split. Pure function of the config.
DatasetSplit generate_dataset(const DatasetConfig& config);

void write_dataset_csv(std::ostream& os, const DatasetSplit& data);
void write_dataset_csv(const std::string& path, const DatasetSplit& data);
DatasetSplit read_dataset_csv(std::istream& is);
DatasetSplit read_dataset_csv(const std::string& path);

struct ThermalRamp {
    double T_start = 24.21;        // deg C
    double T_end = 82.95;          // deg C
    double duration = 50.0;        // minutes
    double acceleration_factor = 23.0;

    void validate() const;
    /// Linear ramp temperature at `t` minutes; t must lie in [0, duration].
    double temperature(double t) const;
    /// Equivalent ageing time in hours after `t` minutes of ramp.
    double aged_hours(double t) const;
};

inline double thermal_ramp_temperature(const ThermalRamp& ramp, double t) { return ramp.temperature(t); }

}  // namespace dtwin
