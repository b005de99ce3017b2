#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "dtwin/degradation.hpp"
#include "dtwin/errors.hpp"

using namespace dtwin;

namespace {

StressInput at_fraction_of_max(double f) {
    const StressRanges r = StressRanges::defaults();
    std::array<double, StressInput::kFields> a{};
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = f * r.field[i].max;
    return StressInput::from_array(a);
}

double stddev(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST(Degrade, ZeroStressIsNominal) {
    const auto k = DegradationConstants::defaults();
    EXPECT_EQ(degrade(StressInput{}, k), k.nominal());
}

TEST(Degrade, InductanceAtTwentyVoltsFiveAmps) {
    StressInput s;
    s.V_in = 20.0;
    s.I_in = 5.0;
    EXPECT_NEAR(degrade(s, DegradationConstants::defaults()).L, 70e-6, 1e-15);
}

TEST(Degrade, EightyPercentStressReachesCapacitorThreshold) {
    const DegradationOutput d = degrade(at_fraction_of_max(0.8), DegradationConstants::defaults());
    EXPECT_NEAR(d.C, 176e-6, 1e-15);
}

TEST(Degrade, MaxStressMovesEachParameterByAQuarter) {
    const auto k = DegradationConstants::calibrated(StressRanges::defaults());
    const DegradationOutput d = degrade(at_fraction_of_max(1.0), k);
    EXPECT_NEAR(d.L, 0.75 * k.L0, 1e-15);
    EXPECT_NEAR(d.C, 0.75 * k.C0, 1e-15);
    EXPECT_NEAR(d.r_L, 1.25 * k.r_L0, 1e-15);
    EXPECT_NEAR(d.r_C, 1.25 * k.r_C0, 1e-15);
    EXPECT_NEAR(d.r_ds_on, 1.25 * k.r_ds0, 1e-15);
    EXPECT_NEAR(d.t_failure, 0.0, 1e-9);
}

TEST(Degrade, FloorsHold) {
    auto k = DegradationConstants::defaults();
    k.k_L *= 100;
    k.k_C *= 100;
    k.k_t *= 100;
    const DegradationOutput d = degrade(at_fraction_of_max(1.0), k);
    EXPECT_EQ(d.L, k.L_floor());
    EXPECT_EQ(d.C, k.C_floor());
    EXPECT_EQ(d.t_failure, 0.0);
}

TEST(Degrade, MonotoneInStress) {
    const auto k = DegradationConstants::defaults();
    StressInput lo, hi;
    for (double x = 0.0; x < 25.0; x += 0.5) {
        lo.V_in = x;
        hi.V_in = x + 0.5;
        EXPECT_GE(degrade(lo, k).L, degrade(hi, k).L);
        EXPECT_GE(degrade(lo, k).t_failure, degrade(hi, k).t_failure);
        lo.V_C = x;
        hi.V_C = x + 0.5;
        EXPECT_GE(degrade(lo, k).C, degrade(hi, k).C);
        EXPECT_LE(degrade(lo, k).r_C, degrade(hi, k).r_C);
    }
}

TEST(SampleStress, DegenerateRangeIsExact) {
    StressRanges r = StressRanges::defaults();
    r.field[0] = {5.0, 5.0};
    EXPECT_EQ(sample_stress(r, 3, 1)[0].V_in, 5.0);
}

TEST(SampleStress, WithinBoundsAndCenteredAndDeterministic) {
    const StressRanges r = StressRanges::defaults();
    const auto s = sample_stress(r, 11, 10000);
    EXPECT_EQ(s, sample_stress(r, 11, 10000));
    for (std::size_t i = 0; i < StressInput::kFields; ++i) {
        double mean = 0.0;
        for (const auto& x : s) {
            const double v = x.as_array()[i];
            ASSERT_GE(v, r.field[i].min);
            ASSERT_LE(v, r.field[i].max);
            mean += v;
        }
        mean /= static_cast<double>(s.size());
        const double mid = 0.5 * (r.field[i].min + r.field[i].max);
        EXPECT_NEAR(mean, mid, 0.02 * mid) << StressInput::kNames[i];
    }
}

TEST(SampleStress, RejectsInvertedRange) {
    StressRanges r = StressRanges::defaults();
    r.field[3] = {2.0, 1.0};
    EXPECT_THROW(sample_stress(r, 1, 5), ValidationError);
}

TEST(AddNoise, ZeroSigmaLeavesRecordUnchanged) {
    DegradationRecord r;
    r.id = 17;
    r.input = at_fraction_of_max(0.5);
    r.output = degrade(r.input, DegradationConstants::defaults());
    EXPECT_EQ(add_noise(r, NoiseSpec::zero()), r);
}

TEST(AddNoise, VoltageSigmaIsRecovered) {
    NoiseSpec spec = NoiseSpec::zero();
    spec.sigma_voltage = 0.05;
    std::vector<double> diff;
    for (std::uint64_t id = 0; id < 10000; ++id) {
        DegradationRecord r;
        r.id = id;
        r.input.V_o = 5.0;
        diff.push_back(add_noise(r, spec).input.V_o - 5.0);
    }
    EXPECT_NEAR(stddev(diff), 0.05, 0.05 * 0.05);
}

TEST(AddNoise, CapacitanceStaysAboveFloor) {
    const auto k = DegradationConstants::defaults();
    NoiseSpec spec = NoiseSpec::zero();
    spec.sigma_C = 0.5e-6;
    for (std::uint64_t id = 0; id < 2000; ++id) {
        DegradationRecord r;
        r.id = id;
        r.output = k.nominal();
        r.output.C = k.C_floor();
        EXPECT_GE(add_noise(r, spec, k).output.C, k.C_floor());
    }
}

TEST(GenerateDataset, SplitCountsAndStrata) {
    DatasetConfig cfg;
    const DatasetSplit d = generate_dataset(cfg);
    EXPECT_EQ(d.train.size(), 7000u);
    EXPECT_EQ(d.validation.size(), 1500u);
    EXPECT_EQ(d.test.size(), 1500u);

    std::set<std::uint64_t> ids;
    for (const auto* part : {&d.train, &d.validation, &d.test})
        for (const auto& r : *part) EXPECT_TRUE(ids.insert(r.id).second);
    EXPECT_EQ(ids.size(), 10000u);
    EXPECT_EQ(*ids.rbegin(), 9999u);

    std::array<double, 3> full{};
    for (const auto& [r, s] : d.all()) full[static_cast<std::size_t>(r.stratum)] += 1.0 / 10000.0;
    for (const auto* part : {&d.train, &d.validation, &d.test}) {
        std::array<double, 3> share{};
        for (const auto& r : *part) share[static_cast<std::size_t>(r.stratum)] += 1.0 / static_cast<double>(part->size());
        for (std::size_t g = 0; g < 3; ++g) EXPECT_NEAR(share[g], full[g], 0.02);
    }
}

TEST(GenerateDataset, SmallN) {
    DatasetConfig cfg;
    cfg.n = 10;
    const DatasetSplit d = generate_dataset(cfg);
    EXPECT_EQ(d.size(), 10u);
    EXPECT_EQ(d.train.size(), 7u);
    EXPECT_GE(d.validation.size(), 1u);
    EXPECT_GE(d.test.size(), 1u);
    cfg.n = 9;
    EXPECT_THROW(generate_dataset(cfg), ValidationError);
}

TEST(GenerateDataset, ZeroNoiseReproducesTheLinearLawsExactly) {
    DatasetConfig cfg;
    cfg.n = 2000;
    cfg.noise = NoiseSpec::zero();
    const DatasetSplit d = generate_dataset(cfg);
    for (const auto& [r, s] : d.all()) ASSERT_EQ(r.output, degrade(r.input, cfg.constants));
}

TEST(GenerateDataset, BitwiseDeterministicUnderSeed) {
    DatasetConfig cfg;
    cfg.n = 500;
    std::stringstream a, b, c;
    write_dataset_csv(a, generate_dataset(cfg));
    write_dataset_csv(b, generate_dataset(cfg));
    EXPECT_EQ(a.str(), b.str());
    cfg.seed += 1;
    write_dataset_csv(c, generate_dataset(cfg));
    EXPECT_NE(a.str(), c.str());
}

TEST(GenerateDataset, NoRecordBelowFloors) {
    DatasetConfig cfg;
    cfg.n = 3000;
    cfg.noise.sigma_L = 50e-6;
    cfg.noise.sigma_C = 100e-6;
    cfg.noise.sigma_t = 2000.0;
    for (const auto& [r, s] : generate_dataset(cfg).all()) {
        ASSERT_GE(r.output.L, cfg.constants.L_floor());
        ASSERT_GE(r.output.C, cfg.constants.C_floor());
        ASSERT_GE(r.output.t_failure, 0.0);
    }
}

TEST(DatasetCsv, RoundTripAndHeader) {
    DatasetConfig cfg;
    cfg.n = 50;
    const DatasetSplit d = generate_dataset(cfg);
    std::stringstream ss;
    write_dataset_csv(ss, d);
    std::string header;
    std::getline(std::stringstream(ss.str()), header);
    EXPECT_EQ(header, "id,V_in,I_in,V_D,I_D,V_L,I_L,V_C,I_C,V_o,L,C,r_L,r_C,r_ds_on,t_failure,stratum,split");
    const DatasetSplit back = read_dataset_csv(ss);
    EXPECT_EQ(back.train, d.train);
    EXPECT_EQ(back.validation, d.validation);
    EXPECT_EQ(back.test, d.test);
}

TEST(ThermalRamp, EndpointsMidpointAndAgedTime) {
    const ThermalRamp ramp;
    EXPECT_DOUBLE_EQ(thermal_ramp_temperature(ramp, 0.0), 24.21);
    EXPECT_DOUBLE_EQ(thermal_ramp_temperature(ramp, 50.0), 82.95);
    EXPECT_NEAR(thermal_ramp_temperature(ramp, 25.0), 53.58, 1e-12);
    EXPECT_NEAR(ramp.aged_hours(50.0), 19.0, 0.05 * 19.0);
    EXPECT_THROW(ramp.temperature(-1.0), ValidationError);
    EXPECT_THROW(ramp.temperature(51.0), ValidationError);
}
