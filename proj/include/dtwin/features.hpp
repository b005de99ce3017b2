#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "dtwin/converter.hpp"
#include "dtwin/degradation.hpp"
#include "dtwin/regression.hpp"

namespace dtwin {

inline constexpr std::array<std::string_view, 6> kFeatureNames = {"L", "C", "r_L", "r_C", "V_o", "I_L"};
inline constexpr std::array<std::string_view, 5> kTargetNames = {"L", "C", "r_L", "r_C", "r_ds_on"};

/// Operating point at which averaged output voltage and inductor current are read
/// for a (possibly degraded) converter. The default is the nominal converter with
/// a 2 Ohm load, which keeps it in continuous conduction so the averages carry the
/// resistive drops, r_ds_on included.
struct FeatureProbe {
    ConverterParams operating;
    SimConfig sim;

    /// dt = T_sw / 200, 60 periods averaged over the last 10, started from the
    /// lossless CCM operating point.
    static FeatureProbe defaults();
    void validate() const;
};

struct ProbeReading {
    double v_o_avg = 0.0;
    double i_L_avg = 0.0;
};

/// Simulates the probe operating point with L, C, r_L, r_C and r_ds_on from `params`.
ProbeReading probe(const DegradationOutput& params, const FeatureProbe& probe);

/// [L, C, r_L, r_C, V_o, I_L]
Vec feature_vector(const DegradationOutput& estimate, const ProbeReading& reading);
/// [L, C, r_L, r_C, r_ds_on]
Vec target_vector(const DegradationOutput& params);

/// Synthetic regime: each record's degraded parameters stand in for the identified
/// ones and are also what the probe simulates.
RegressionData synthetic_regression_data(const std::vector<DegradationRecord>& records, const FeatureProbe& probe);

}  // namespace dtwin
