#include "dtwin/identification.hpp"

#include <cmath>
#include <limits>

#include "dtwin/errors.hpp"
#include "dtwin/random.hpp"

namespace dtwin {

using detail::require;

double istse_cost(const SimTrace& measured, const SimTrace& simulated, int time_exponent) {
    measured.validate();
    simulated.validate();
    require(time_exponent == 1 || time_exponent == 2, "istse_cost: time exponent must be 1 or 2");
    require(measured.size() == simulated.size(), "istse_cost: traces differ in length");
    const double dt = measured.dt();
    require(std::abs(dt - simulated.dt()) <= 1e-9 * std::abs(dt), "istse_cost: traces differ in dt");

    const auto& t = measured.t;
    const Vec e2 = (measured.v_o - simulated.v_o).array().square() + (measured.i_L - simulated.i_L).array().square();
    const Vec w = time_exponent == 2 ? Vec(t.array().square()) : t;
    const Eigen::Index n = t.size();
    const double interior = w.segment(1, n - 2).dot(e2.segment(1, n - 2));
    return (interior + 0.5 * (w[0] * e2[0] + w[n - 1] * e2[n - 1])) * dt;
}

std::string to_string(Param p) {
    switch (p) {
        case Param::L: return "L";
        case Param::C: return "C";
        case Param::r_L: return "r_L";
        case Param::r_C: return "r_C";
        case Param::r_ds_on: return "r_ds_on";
    }
    return "?";
}

Param parse_param(const std::string& s) {
    for (Param p : {Param::L, Param::C, Param::r_L, Param::r_C, Param::r_ds_on})
        if (to_string(p) == s) return p;
    throw ValidationError("unknown parameter '" + s + "'");
}

double get(const ConverterParams& p, Param which) {
    switch (which) {
        case Param::L: return p.L;
        case Param::C: return p.C;
        case Param::r_L: return p.r_L;
        case Param::r_C: return p.r_C;
        case Param::r_ds_on: return p.r_ds_on;
    }
    return 0.0;
}

void set(ConverterParams& p, Param which, double value) {
    switch (which) {
        case Param::L: p.L = value; break;
        case Param::C: p.C = value; break;
        case Param::r_L: p.r_L = value; break;
        case Param::r_C: p.r_C = value; break;
        case Param::r_ds_on: p.r_ds_on = value; break;
    }
}

IdentificationSetup IdentificationSetup::defaults() {
    IdentificationSetup s;
    s.sim.dt = s.fixed.period() / 200.0;
    s.sim.n_periods = 40;
    s.sim.settle_periods = 30;
    return s;
}

ConverterParams IdentificationSetup::embed(const Vec& x) const {
    require(x.size() == static_cast<Eigen::Index>(params.size()), "IdentificationSetup: dimension mismatch");
    ConverterParams p = fixed;
    for (std::size_t k = 0; k < params.size(); ++k) set(p, params[k], x[static_cast<Eigen::Index>(k)]);
    return p;
}

Vec IdentificationSetup::extract(const ConverterParams& p) const {
    Vec x(static_cast<Eigen::Index>(params.size()));
    for (std::size_t k = 0; k < params.size(); ++k) x[static_cast<Eigen::Index>(k)] = get(p, params[k]);
    return x;
}

Bounds<double> relative_bounds(const IdentificationSetup& setup, const ConverterParams& center, double fraction) {
    require(fraction >= 0 && fraction < 1, "relative_bounds: fraction must lie in [0, 1)");
    const Vec c = setup.extract(center);
    return {c * (1.0 - fraction), c * (1.0 + fraction)};
}

Objective<double> identification_objective(const SimTrace& measured, const IdentificationSetup& setup) {
    measured.validate();
    return [measured, setup](const Vec& x) {
        try {
            return istse_cost(measured, simulate(setup.embed(x), setup.sim), setup.time_exponent);
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        } catch (const ValidationError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
}

IdentificationResult identify_parameters(const SimTrace& measured, const IdentificationSetup& setup,
                                         const Bounds<double>& bounds, const OptimizerSpec& optimizer) {
    require(bounds.dim() == static_cast<Eigen::Index>(setup.params.size()),
            "identify_parameters: bounds dimension does not match the identified parameters");
    const auto expected = static_cast<Eigen::Index>(setup.sim.steps_per_period(setup.fixed)) * setup.sim.n_periods;
    require(measured.size() == expected, "identify_parameters: measured trace does not match the simulation grid");
    const auto f = identification_objective(measured, setup);
    IdentificationResult r;
    r.optimization = optimize(f, bounds, optimizer);
    r.params = setup.embed(r.optimization.best.position);
    return r;
}

SimTrace add_measurement_noise(const SimTrace& trace, double sigma_v, double sigma_i, std::uint64_t seed) {
    require(sigma_v >= 0 && sigma_i >= 0, "add_measurement_noise: sigmas must be >= 0");
    SimTrace out = trace;
    Rng rng(seed);
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        out.v_o[k] += gaussian(rng, sigma_v);
        out.i_L[k] += gaussian(rng, sigma_i);
    }
    return out;
}

double max_relative_error(const IdentificationSetup& setup, const ConverterParams& found,
                          const ConverterParams& planted) {
    const Vec a = setup.extract(found);
    const Vec b = setup.extract(planted);
    return ((a - b).array().abs() / b.array().abs()).maxCoeff();
}

}  // namespace dtwin
