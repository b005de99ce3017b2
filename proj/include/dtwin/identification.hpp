#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtwin/converter.hpp"
#include "dtwin/swarm.hpp"

namespace dtwin {

/// Time-weighted squared waveform error, sum_i t_i^p [(dv_o)^2 + (di_L)^2] dt,
/// integrated with the trapezoidal rule over the shared sample grid.
/// `time_exponent` is 2 for the identification cost or 1 for plain ISTSE.
double istse_cost(const SimTrace& measured, const SimTrace& simulated, int time_exponent = 2);

enum class Param { L, C, r_L, r_C, r_ds_on };

std::string to_string(Param p);
Param parse_param(const std::string& s);
double get(const ConverterParams& p, Param which);
void set(ConverterParams& p, Param which, double value);

/// Which parameters the search varies; everything else is taken from `fixed`.
struct IdentificationSetup {
    ConverterParams fixed;
    SimConfig sim;
    std::vector<Param> params = {Param::L, Param::C, Param::r_L, Param::r_C};
    int time_exponent = 2;

    /// Nominal converter, dt = T_sw / 200 and a 40-period start-up record. The start-up
    /// transient carries most of the information about L, C and the ESRs.
    static IdentificationSetup defaults();

    ConverterParams embed(const Vec& x) const;
    Vec extract(const ConverterParams& p) const;
};

/// Box of +-`fraction` around the identified parameters of `center`.
Bounds<double> relative_bounds(const IdentificationSetup& setup, const ConverterParams& center, double fraction);

/// istse_cost(measured, simulate(embed(x))). A candidate whose simulation fails
/// costs +infinity instead of aborting the search.
Objective<double> identification_objective(const SimTrace& measured, const IdentificationSetup& setup);

struct IdentificationResult {
    ConverterParams params;
    OptimizeResult<double> optimization;
};

IdentificationResult identify_parameters(const SimTrace& measured, const IdentificationSetup& setup,
                                         const Bounds<double>& bounds, const OptimizerSpec& optimizer);

/// Adds independent Gaussian noise to the v_o and i_L channels.
SimTrace add_measurement_noise(const SimTrace& trace, double sigma_v, double sigma_i, std::uint64_t seed);

/// Max relative error |found - planted| / |planted| over the identified parameters.
double max_relative_error(const IdentificationSetup& setup, const ConverterParams& found,
                          const ConverterParams& planted);

}  // namespace dtwin
