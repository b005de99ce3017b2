#include "dtwin/features.hpp"

namespace dtwin {

FeatureProbe FeatureProbe::defaults() {
    FeatureProbe p;
    p.operating.R_load = 2.0;
    p.sim.dt = p.operating.period() / 200.0;
    p.sim.n_periods = 60;
    p.sim.settle_periods = 50;
    const double v = p.operating.D * p.operating.V_in - (1.0 - p.operating.D) * p.operating.V_diode;
    p.sim.v_C0 = v;
    p.sim.i_L0 = v / p.operating.R_load;
    return p;
}

void FeatureProbe::validate() const {
    operating.validate();
    sim.validate(operating);
}

ProbeReading probe(const DegradationOutput& params, const FeatureProbe& probe) {
    ConverterParams p = probe.operating;
    p.L = params.L;
    p.C = params.C;
    p.r_L = params.r_L;
    p.r_C = params.r_C;
    p.r_ds_on = params.r_ds_on;
    const auto m = measure_ripple(simulate(p, probe.sim), probe.sim);
    return {m.v_o_avg, m.i_L_avg};
}

Vec feature_vector(const DegradationOutput& estimate, const ProbeReading& reading) {
    Vec x(6);
    x << estimate.L, estimate.C, estimate.r_L, estimate.r_C, reading.v_o_avg, reading.i_L_avg;
    return x;
}

Vec target_vector(const DegradationOutput& params) {
    Vec y(5);
    y << params.L, params.C, params.r_L, params.r_C, params.r_ds_on;
    return y;
}

RegressionData synthetic_regression_data(const std::vector<DegradationRecord>& records, const FeatureProbe& pr) {
    pr.validate();
    const auto n = static_cast<Eigen::Index>(records.size());
    RegressionData d{Mat(n, 6), Mat(n, 5)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& out = records[static_cast<std::size_t>(i)].output;
        d.X.row(i) = feature_vector(out, probe(out, pr)).transpose();
        d.Y.row(i) = target_vector(out).transpose();
    }
    return d;
}

}  // namespace dtwin
