#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dtwin/types.hpp"

namespace dtwin {

/// Electrical parameters of the open-loop buck converter, parasitics included.
/// Defaults are the nominal bench operating point (25 V, 100 Ohm, 100 uH, 220 uF,
/// 50 % duty at 10 kHz), which runs in discontinuous conduction.
struct ConverterParams {
    double L = 100e-6;        // H
    double C = 220e-6;        // F
    double r_L = 0.1;         // Ohm
    double r_C = 0.05;        // Ohm
    double r_ds_on = 0.25;    // Ohm
    double V_in = 25.0;       // V
    double R_load = 100.0;    // Ohm
    double f_sw = 10e3;       // Hz
    double D = 0.5;
    double V_diode = 0.7;     // V

    double period() const { return 1.0 / f_sw; }
    void validate() const;

    friend bool operator==(const ConverterParams&, const ConverterParams&) = default;
};

struct SimConfig {
    double dt = 100e-9;
    int n_periods = 200;
    int settle_periods = 150;
    double i_L0 = 0.0;
    double v_C0 = 0.0;

    /// dt = T_sw / 1000 with the default horizon.
    static SimConfig defaults_for(const ConverterParams& p);

    /// Integration steps per switching period; throws unless T_sw/dt is an integer >= 100.
    int steps_per_period(const ConverterParams& p) const;
    void validate(const ConverterParams& p) const;
};

enum class Conduction : std::uint8_t { Switch, Diode, Idle };

char conduction_code(Conduction m);

/// Uniformly sampled converter waveforms. Sample k holds the state at t[k] and
/// the conduction state used for the step that starts there.
struct SimTrace {
    Vec t;
    Vec v_o;
    Vec i_L;
    Vec v_C;
    std::vector<Conduction> mode;

    Eigen::Index size() const { return t.size(); }
    double dt() const;
    void validate() const;
};

enum class ConductionMode { DCM, CCM };

struct RippleMetrics {
    double v_ripple_pp = 0.0;
    double i_ripple_pp = 0.0;
    double v_o_avg = 0.0;
    double i_L_avg = 0.0;
    ConductionMode mode = ConductionMode::CCM;
};

std::string to_string(ConductionMode m);

/// Fixed-step switching simulation. Inductor current is clamped at zero while the
/// switch is off (diode blocks), which produces DCM without special casing.
/// Throws NumericalError naming the step if the state becomes non-finite.
SimTrace simulate(const ConverterParams& params, const SimConfig& config);

/// Ripple and averages over the samples after `settle_periods`. The period length
/// in samples is trace.size() / config.n_periods.
RippleMetrics measure_ripple(const SimTrace& trace, const SimConfig& config);

/// Max |v_o| difference between the last period and the one before it.
double steady_state_periodicity(const SimTrace& trace, const SimConfig& config);

/// CSV with header `t,v_o,i_L,v_C,mode`, mode in {S, D, I}.
void write_trace_csv(std::ostream& os, const SimTrace& trace);
void write_trace_csv(const std::string& path, const SimTrace& trace);
SimTrace read_trace_csv(std::istream& is);
SimTrace read_trace_csv(const std::string& path);

}  // namespace dtwin
