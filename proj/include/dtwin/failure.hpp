#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dtwin/degradation.hpp"

namespace dtwin {

enum class Component { L, C, r_L, r_C, r_ds_on };

inline constexpr std::array<Component, 5> kComponents = {Component::L, Component::C, Component::r_L, Component::r_C,
                                                         Component::r_ds_on};

std::string to_string(Component c);
Component parse_component(const std::string& s);

/// One value per component, indexed in kComponents order.
using ComponentValues = std::array<double, 5>;

ComponentValues component_values(const DegradationOutput& d);

/// L and C fail by dropping, the resistances by growing, each by a fraction of nominal.
struct FailureThresholds {
    double c_drop_fraction = 0.20;
    double l_drop_fraction = 0.10;
    double r_l_growth_fraction = 0.50;
    double r_c_growth_fraction = 1.00;
    double r_ds_growth_fraction = 0.50;

    void validate() const;
    /// Failure values for the given nominal parameters.
    ComponentValues limits(const DegradationConstants& nominal) const;
};

/// True for components that degrade by decreasing (L, C).
bool degrades_downward(Component c);

struct FailureReport {
    double t_failure = 0.0;                 // hours, +inf when nothing is projected to fail
    std::optional<Component> first_failing;  // empty when t_failure is +inf
    ComponentValues time_to_failure{};       // hours per component, +inf for no projected failure
    ComponentValues margin{};                // fraction of the nominal-to-threshold span consumed
};

/// Linear extrapolation of each component to its threshold. `rates` are in units
/// per hour, positive in the degrading direction; a component with no positive
/// rate is never projected to fail unless it is already at or past its threshold,
/// in which case its time to failure is 0. Ties go to the earlier entry of kComponents.
FailureReport time_to_failure(const DegradationOutput& current, const DegradationConstants& nominal,
                              const ComponentValues& rates, const FailureThresholds& thresholds);

struct ParameterSnapshot {
    double t_hours = 0.0;
    DegradationOutput params;
};

struct RateEstimate {
    ComponentValues rate{};                 // units per hour, positive in the degrading direction
    std::array<bool, 5> recovering{};       // slope points away from the degrading direction
    bool any_recovering() const;
};

/// Least-squares slope per component over >= 2 snapshots with increasing time stamps.
RateEstimate rate_from_history(const std::vector<ParameterSnapshot>& history);

/// Average degradation rate per component, assuming the drift from nominal built up
/// linearly over `consumed_hours`. Zero consumed life gives zero rates.
ComponentValues rates_from_consumed_life(const DegradationOutput& current, const DegradationConstants& nominal,
                                         double consumed_hours);

struct TtfConsistency {
    double label_t_failure = 0.0;      // t0 - k_t (V_in + I_in), clamped to [0, t0]
    double threshold_t_failure = 0.0;  // from time_to_failure, may be +inf
    double discrepancy = 0.0;          // |label - threshold|, +inf when only one side is finite
    std::optional<Component> first_failing;
};

/// Compares the label time to failure of a noiseless record with the threshold
/// model. The label implies k_t (V_in + I_in) hours of life already consumed; each
/// component's rate is its accumulated degradation over that time.
TtfConsistency synthetic_ttf_consistency(const DegradationRecord& record, const DegradationConstants& constants,
                                         const FailureThresholds& thresholds = {});

}  // namespace dtwin
