#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dtwin/errors.hpp"
#include "dtwin/failure.hpp"
#include "dtwin/random.hpp"

using namespace dtwin;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const DegradationConstants& nominal() {
    static const DegradationConstants k = DegradationConstants::defaults();
    return k;
}

StressInput at_max(const StressRanges& r) {
    std::array<double, StressInput::kFields> a{};
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = r.max_of(i);
    return StressInput::from_array(a);
}

}  // namespace

TEST(Thresholds, Limits) {
    const auto lim = FailureThresholds{}.limits(nominal());
    EXPECT_DOUBLE_EQ(lim[0], 90e-6);
    EXPECT_DOUBLE_EQ(lim[1], 176e-6);
    EXPECT_DOUBLE_EQ(lim[2], 0.15);
    EXPECT_DOUBLE_EQ(lim[3], 0.10);
    EXPECT_DOUBLE_EQ(lim[4], 0.375);
    FailureThresholds bad;
    bad.c_drop_fraction = 1.5;
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(TimeToFailure, CapacitorAtThresholdFailsNow) {
    DegradationOutput d = nominal().nominal();
    d.C = 176e-6;
    const auto r = time_to_failure(d, nominal(), {}, {});
    EXPECT_EQ(r.t_failure, 0.0);
    ASSERT_TRUE(r.first_failing.has_value());
    EXPECT_EQ(*r.first_failing, Component::C);
    EXPECT_EQ(r.margin[1], 1.0);
    EXPECT_EQ(r.margin[0], 0.0);
}

TEST(TimeToFailure, HealthyAndStillIsNeverProjectedToFail) {
    const auto r = time_to_failure(nominal().nominal(), nominal(), {}, {});
    EXPECT_TRUE(std::isinf(r.t_failure));
    EXPECT_FALSE(r.first_failing.has_value());
    for (double t : r.time_to_failure) EXPECT_TRUE(std::isinf(t));
}

TEST(TimeToFailure, LinearExtrapolation) {
    DegradationOutput d = nominal().nominal();
    d.C = 198e-6;
    ComponentValues rates{};
    rates[1] = 2.2e-6;
    const auto r = time_to_failure(d, nominal(), rates, {});
    EXPECT_NEAR(r.t_failure, 10.0, 1e-9);
    EXPECT_EQ(*r.first_failing, Component::C);
    EXPECT_NEAR(r.margin[1], 0.5, 1e-12);
}

TEST(TimeToFailure, NegativeRatesMeanNoProjection) {
    DegradationOutput d = nominal().nominal();
    d.r_L = 0.12;
    ComponentValues rates{};
    rates[2] = -1e-3;
    const auto r = time_to_failure(d, nominal(), rates, {});
    EXPECT_TRUE(std::isinf(r.time_to_failure[2]));
}

TEST(TimeToFailure, TiesGoToTheEarlierComponent) {
    DegradationOutput d = nominal().nominal();
    ComponentValues rates{};
    const auto lim = FailureThresholds{}.limits(nominal());
    rates[1] = (d.C - lim[1]) / 4.0;
    rates[3] = (lim[3] - d.r_C) / 4.0;
    const auto r = time_to_failure(d, nominal(), rates, {});
    ASSERT_EQ(r.time_to_failure[1], r.time_to_failure[3]);
    EXPECT_EQ(*r.first_failing, Component::C);
}

TEST(TimeToFailure, ReportIsTheMinimumOverComponents) {
    Rng rng(123);
    const auto lim = FailureThresholds{}.limits(nominal());
    const auto nom = component_values(nominal().nominal());
    for (int trial = 0; trial < 1000; ++trial) {
        DegradationOutput d;
        ComponentValues v{}, rates{};
        for (std::size_t i = 0; i < 5; ++i) {
            v[i] = uniform(rng, std::min(nom[i], lim[i]) * 0.9, std::max(nom[i], lim[i]) * 1.05);
            rates[i] = uniform01(rng) < 0.2 ? 0.0 : uniform(rng, -0.1, 1.0) * nom[i] * 1e-3;
        }
        d = {v[0], v[1], v[2], v[3], v[4], 0.0};
        const auto r = time_to_failure(d, nominal(), rates, {});
        double best = kInf;
        std::size_t arg = 5;
        for (std::size_t i = 0; i < 5; ++i)
            if (r.time_to_failure[i] < best) best = r.time_to_failure[i], arg = i;
        ASSERT_EQ(r.t_failure, best);
        if (arg < 5)
            ASSERT_EQ(*r.first_failing, kComponents[arg]);
        else
            ASSERT_FALSE(r.first_failing.has_value());
        for (double t : r.time_to_failure) ASSERT_GE(t, 0.0);
    }
}

TEST(TimeToFailure, FasterDegradationNeverLastsLonger) {
    DegradationOutput d = nominal().nominal();
    d.L = 95e-6;
    ComponentValues rates{};
    double prev = kInf;
    for (double k = 1e-8; k < 1e-5; k *= 2) {
        rates[0] = k;
        const double t = time_to_failure(d, nominal(), rates, {}).t_failure;
        EXPECT_LE(t, prev);
        prev = t;
    }
}

TEST(TimeToFailure, RejectsBadInput) {
    DegradationOutput d = nominal().nominal();
    ComponentValues rates{};
    rates[0] = std::nan("");
    EXPECT_THROW(time_to_failure(d, nominal(), rates, {}), ValidationError);
    d.C = -1.0;
    EXPECT_THROW(time_to_failure(d, nominal(), {}, {}), ValidationError);
}

TEST(Rates, SlopeOfTwoMicrofaradsPerHour) {
    std::vector<ParameterSnapshot> h;
    for (int k = 0; k < 3; ++k) {
        DegradationOutput d = nominal().nominal();
        d.C = 220e-6 - 2e-6 * k;
        h.push_back({static_cast<double>(k), d});
    }
    const auto e = rate_from_history(h);
    EXPECT_NEAR(e.rate[1], 2e-6, 1e-15);
    EXPECT_FALSE(e.any_recovering());
}

TEST(Rates, ConstantHistoryHasZeroRate) {
    const auto d = nominal().nominal();
    const auto e = rate_from_history({{0.0, d}, {5.0, d}, {9.0, d}});
    for (double r : e.rate) EXPECT_EQ(r, 0.0);
    EXPECT_FALSE(e.any_recovering());
}

TEST(Rates, NoisySlopeWithinTenPercent) {
    Rng rng(4);
    std::vector<ParameterSnapshot> h;
    for (int k = 0; k < 10; ++k) {
        DegradationOutput d = nominal().nominal();
        d.r_ds_on = 0.25 + 0.002 * k + gaussian(rng, 0.0002);
        h.push_back({static_cast<double>(k), d});
    }
    const auto e = rate_from_history(h);
    EXPECT_NEAR(e.rate[4], 0.002, 0.0002);
}

TEST(Rates, RecoveryIsFlagged) {
    auto a = nominal().nominal();
    auto b = a;
    b.L = 101e-6;
    const auto e = rate_from_history({{0.0, a}, {1.0, b}});
    EXPECT_TRUE(e.recovering[0]);
    EXPECT_TRUE(e.any_recovering());
}

TEST(Rates, NeedTwoIncreasingSnapshots) {
    const auto d = nominal().nominal();
    EXPECT_THROW(rate_from_history({{0.0, d}}), ValidationError);
    EXPECT_THROW(rate_from_history({{1.0, d}, {1.0, d}}), ValidationError);
}

TEST(Rates, FromConsumedLife) {
    DegradationOutput d = nominal().nominal();
    d.C = 200e-6;
    d.r_L = 0.12;
    const auto r = rates_from_consumed_life(d, nominal(), 10.0);
    EXPECT_NEAR(r[1], 2e-6, 1e-18);
    EXPECT_NEAR(r[2], 2e-3, 1e-15);
    EXPECT_EQ(r[0], 0.0);
    for (double v : rates_from_consumed_life(d, nominal(), 0.0)) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(rates_from_consumed_life(d, nominal(), -1.0), ValidationError);
}

TEST(Consistency, UnstressedPartNeverFails) {
    DegradationRecord rec;
    const auto c = synthetic_ttf_consistency(rec, nominal());
    EXPECT_EQ(c.label_t_failure, nominal().t0);
    EXPECT_TRUE(std::isinf(c.threshold_t_failure));
    EXPECT_TRUE(std::isinf(c.discrepancy));
}

TEST(Consistency, FullyStressedPartHasAFiniteProjection) {
    DegradationRecord rec;
    rec.input = at_max(StressRanges::defaults());
    const auto c = synthetic_ttf_consistency(rec, nominal());
    EXPECT_TRUE(std::isfinite(c.threshold_t_failure));
    EXPECT_TRUE(c.first_failing.has_value());
    EXPECT_TRUE(std::isfinite(c.discrepancy));
}

TEST(Components, Names) {
    for (Component c : kComponents) EXPECT_EQ(parse_component(to_string(c)), c);
    EXPECT_THROW(parse_component("R_load"), ValidationError);
    EXPECT_TRUE(degrades_downward(Component::L));
    EXPECT_FALSE(degrades_downward(Component::r_ds_on));
}
