#include "dtwin/converter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dtwin/errors.hpp"

namespace dtwin {

using detail::require;

void ConverterParams::validate() const {
    require(L > 0 && std::isfinite(L), "ConverterParams: L must be > 0");
    require(C > 0 && std::isfinite(C), "ConverterParams: C must be > 0");
    require(R_load > 0 && std::isfinite(R_load), "ConverterParams: R_load must be > 0");
    require(f_sw > 0 && std::isfinite(f_sw), "ConverterParams: f_sw must be > 0");
    require(r_L >= 0 && r_C >= 0 && r_ds_on >= 0, "ConverterParams: resistances must be >= 0");
    require(V_diode >= 0, "ConverterParams: V_diode must be >= 0");
    require(std::isfinite(V_in), "ConverterParams: V_in must be finite");
    require(D > 0 && D < 1, "ConverterParams: duty ratio D must lie in (0, 1)");
}

SimConfig SimConfig::defaults_for(const ConverterParams& p) {
    SimConfig c;
    c.dt = p.period() / 1000.0;
    return c;
}

int SimConfig::steps_per_period(const ConverterParams& p) const {
    require(dt > 0 && std::isfinite(dt), "SimConfig: dt must be > 0");
    const double ratio = p.period() / dt;
    const double n = std::round(ratio);
    require(std::abs(ratio - n) <= 1e-6 * n, "SimConfig: dt must divide the switching period");
    require(n >= 100, "SimConfig: need at least 100 steps per switching period");
    return static_cast<int>(n);
}

void SimConfig::validate(const ConverterParams& p) const {
    steps_per_period(p);
    require(n_periods >= 1, "SimConfig: n_periods must be >= 1");
    require(settle_periods >= 0 && settle_periods < n_periods, "SimConfig: settle_periods must be in [0, n_periods)");
    require(std::isfinite(i_L0) && i_L0 >= 0, "SimConfig: initial inductor current must be finite and >= 0");
    require(std::isfinite(v_C0), "SimConfig: initial capacitor voltage must be finite");
}

char conduction_code(Conduction m) {
    switch (m) {
        case Conduction::Switch: return 'S';
        case Conduction::Diode: return 'D';
        case Conduction::Idle: return 'I';
    }
    return '?';
}

std::string to_string(ConductionMode m) { return m == ConductionMode::DCM ? "DCM" : "CCM"; }

double SimTrace::dt() const {
    require(t.size() >= 2, "SimTrace: need at least two samples");
    return t[1] - t[0];
}

void SimTrace::validate() const {
    const auto n = t.size();
    require(n >= 2, "SimTrace: need at least two samples");
    require(v_o.size() == n && i_L.size() == n && v_C.size() == n &&
                static_cast<Eigen::Index>(mode.size()) == n,
            "SimTrace: channel lengths differ");
}

SimTrace simulate(const ConverterParams& p, const SimConfig& config) {
    p.validate();
    config.validate(p);

    const int per_period = config.steps_per_period(p);
    const int on_steps = static_cast<int>(std::lround(p.D * per_period));
    require(on_steps > 0 && on_steps < per_period, "simulate: duty ratio rounds to a degenerate switching pattern");
    const Eigen::Index n = static_cast<Eigen::Index>(per_period) * config.n_periods;

    SimTrace tr;
    tr.t.resize(n);
    tr.v_o.resize(n);
    tr.i_L.resize(n);
    tr.v_C.resize(n);
    tr.mode.resize(static_cast<std::size_t>(n));

    const double dt = config.dt;
    const double R = p.R_load;
    // v_o = v_C + r_C (i_L - v_o / R) solved for v_o
    const double out_gain = R / (R + p.r_C);
    const double cap_gain = dt / ((R + p.r_C) * p.C);
    const double dt_over_L = dt / p.L;
    const double r_on = p.r_ds_on + p.r_L;

    double i = config.i_L0;
    double vc = config.v_C0;
    int phase = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double vo = (vc + p.r_C * i) * out_gain;
        const bool on = phase < on_steps;
        Conduction m;
        double di;
        if (on) {
            m = Conduction::Switch;
            di = (p.V_in - i * r_on - vo) * dt_over_L;
        } else if (i > 0.0) {
            m = Conduction::Diode;
            di = (-p.V_diode - i * p.r_L - vo) * dt_over_L;
        } else {
            m = Conduction::Idle;
            di = 0.0;
        }
        tr.t[k] = static_cast<double>(k) * dt;
        tr.v_o[k] = vo;
        tr.i_L[k] = i;
        tr.v_C[k] = vc;
        tr.mode[static_cast<std::size_t>(k)] = m;

        // Semi-implicit step: current first, then the capacitor sees the updated current.
        i = std::max(0.0, i + di);
        vc += (R * i - vc) * cap_gain;
        if (!std::isfinite(i) || !std::isfinite(vc)) {
            throw NumericalError("simulate: non-finite state at step " + std::to_string(k + 1) +
                                 " (t = " + std::to_string(static_cast<double>(k + 1) * dt) + " s)");
        }
        if (++phase == per_period) phase = 0;
    }
    return tr;
}

namespace {

Eigen::Index period_samples(const SimTrace& trace, const SimConfig& config) {
    trace.validate();
    require(config.n_periods >= 1, "SimConfig: n_periods must be >= 1");
    require(trace.size() % config.n_periods == 0, "trace length is not a whole number of periods");
    return trace.size() / config.n_periods;
}

}  // namespace

RippleMetrics measure_ripple(const SimTrace& trace, const SimConfig& config) {
    const Eigen::Index per = period_samples(trace, config);
    require(config.settle_periods >= 0 && config.settle_periods < config.n_periods,
            "measure_ripple: steady-state window is empty");
    const Eigen::Index start = per * config.settle_periods;
    const Eigen::Index len = trace.size() - start;

    const auto vo = trace.v_o.segment(start, len);
    const auto il = trace.i_L.segment(start, len);
    RippleMetrics m;
    m.v_ripple_pp = vo.maxCoeff() - vo.minCoeff();
    m.i_ripple_pp = il.maxCoeff() - il.minCoeff();
    m.v_o_avg = vo.mean();
    m.i_L_avg = il.mean();
    const bool idle = std::any_of(trace.mode.begin() + start, trace.mode.end(),
                                  [](Conduction c) { return c == Conduction::Idle; });
    m.mode = idle ? ConductionMode::DCM : ConductionMode::CCM;
    return m;
}

double steady_state_periodicity(const SimTrace& trace, const SimConfig& config) {
    const Eigen::Index per = period_samples(trace, config);
    require(config.n_periods - config.settle_periods >= 2,
            "steady_state_periodicity: need at least two periods after settling");
    const Eigen::Index n = trace.size();
    return (trace.v_o.segment(n - per, per) - trace.v_o.segment(n - 2 * per, per)).cwiseAbs().maxCoeff();
}

void write_trace_csv(std::ostream& os, const SimTrace& trace) {
    trace.validate();
    os << "t,v_o,i_L,v_C,mode\n";
    os << std::setprecision(17);
    for (Eigen::Index k = 0; k < trace.size(); ++k) {
        os << trace.t[k] << ',' << trace.v_o[k] << ',' << trace.i_L[k] << ',' << trace.v_C[k] << ','
           << conduction_code(trace.mode[static_cast<std::size_t>(k)]) << '\n';
    }
}

void write_trace_csv(const std::string& path, const SimTrace& trace) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    write_trace_csv(os, trace);
    if (!os) throw IoError("write failed: " + path);
}

SimTrace read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("trace CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(line == "t,v_o,i_L,v_C,mode", "trace CSV: unexpected header '" + line + "'");

    std::vector<double> t, vo, il, vc;
    std::vector<Conduction> mode;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::istringstream ss(line);
        double a, b, c, d;
        char s1, s2, s3, s4, code;
        if (!(ss >> a >> s1 >> b >> s2 >> c >> s3 >> d >> s4 >> code) || s1 != ',' || s2 != ',' || s3 != ',' ||
            s4 != ',') {
            throw ValidationError("trace CSV: malformed line " + std::to_string(lineno));
        }
        Conduction m;
        switch (code) {
            case 'S': m = Conduction::Switch; break;
            case 'D': m = Conduction::Diode; break;
            case 'I': m = Conduction::Idle; break;
            default: throw ValidationError("trace CSV: bad mode code on line " + std::to_string(lineno));
        }
        t.push_back(a);
        vo.push_back(b);
        il.push_back(c);
        vc.push_back(d);
        mode.push_back(m);
    }
    SimTrace tr;
    tr.t = Eigen::Map<const Vec>(t.data(), static_cast<Eigen::Index>(t.size()));
    tr.v_o = Eigen::Map<const Vec>(vo.data(), static_cast<Eigen::Index>(vo.size()));
    tr.i_L = Eigen::Map<const Vec>(il.data(), static_cast<Eigen::Index>(il.size()));
    tr.v_C = Eigen::Map<const Vec>(vc.data(), static_cast<Eigen::Index>(vc.size()));
    tr.mode = std::move(mode);
    tr.validate();
    return tr;
}

SimTrace read_trace_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    return read_trace_csv(is);
}

}  // namespace dtwin
