#include "dtwin/failure.hpp"

#include <cmath>
#include <limits>

#include "dtwin/errors.hpp"

namespace dtwin {

using detail::require;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t index_of(Component c) { return static_cast<std::size_t>(c); }

ComponentValues nominal_values(const DegradationConstants& k) { return {k.L0, k.C0, k.r_L0, k.r_C0, k.r_ds0}; }

}  // namespace

std::string to_string(Component c) {
    switch (c) {
        case Component::L: return "L";
        case Component::C: return "C";
        case Component::r_L: return "r_L";
        case Component::r_C: return "r_C";
        case Component::r_ds_on: return "r_ds_on";
    }
    return "?";
}

Component parse_component(const std::string& s) {
    for (Component c : kComponents)
        if (to_string(c) == s) return c;
    throw ValidationError("unknown component '" + s + "'");
}

ComponentValues component_values(const DegradationOutput& d) { return {d.L, d.C, d.r_L, d.r_C, d.r_ds_on}; }

bool degrades_downward(Component c) { return c == Component::L || c == Component::C; }

void FailureThresholds::validate() const {
    require(c_drop_fraction > 0 && c_drop_fraction <= 1, "FailureThresholds: c_drop_fraction must lie in (0, 1]");
    require(l_drop_fraction > 0 && l_drop_fraction <= 1, "FailureThresholds: l_drop_fraction must lie in (0, 1]");
    require(r_l_growth_fraction > 0 && std::isfinite(r_l_growth_fraction), "FailureThresholds: r_l_growth_fraction must be > 0");
    require(r_c_growth_fraction > 0 && std::isfinite(r_c_growth_fraction), "FailureThresholds: r_c_growth_fraction must be > 0");
    require(r_ds_growth_fraction > 0 && std::isfinite(r_ds_growth_fraction),
            "FailureThresholds: r_ds_growth_fraction must be > 0");
}

ComponentValues FailureThresholds::limits(const DegradationConstants& k) const {
    return {k.L0 * (1.0 - l_drop_fraction), k.C0 * (1.0 - c_drop_fraction), k.r_L0 * (1.0 + r_l_growth_fraction),
            k.r_C0 * (1.0 + r_c_growth_fraction), k.r_ds0 * (1.0 + r_ds_growth_fraction)};
}

FailureReport time_to_failure(const DegradationOutput& current, const DegradationConstants& nominal,
                              const ComponentValues& rates, const FailureThresholds& thresholds) {
    thresholds.validate();
    nominal.validate();
    const ComponentValues value = component_values(current);
    const ComponentValues nom = nominal_values(nominal);
    const ComponentValues limit = thresholds.limits(nominal);
    for (std::size_t i = 0; i < value.size(); ++i) {
        require(std::isfinite(value[i]) && value[i] >= 0, "time_to_failure: parameter values must be finite and >= 0");
        require(!std::isnan(rates[i]), "time_to_failure: rate is NaN");
    }

    FailureReport r;
    r.t_failure = kInf;
    for (Component c : kComponents) {
        const std::size_t i = index_of(c);
        const double sign = degrades_downward(c) ? 1.0 : -1.0;
        double headroom = sign * (value[i] - limit[i]);
        if (std::abs(headroom) <= 1e-12 * nom[i]) headroom = 0.0;
        r.margin[i] = headroom == 0.0 ? 1.0 : sign * (nom[i] - value[i]) / (sign * (nom[i] - limit[i]));
        if (headroom <= 0.0) {
            r.time_to_failure[i] = 0.0;
        } else if (rates[i] > 0.0) {
            r.time_to_failure[i] = headroom / rates[i];
        } else {
            r.time_to_failure[i] = kInf;
        }
        if (r.time_to_failure[i] < r.t_failure) {
            r.t_failure = r.time_to_failure[i];
            r.first_failing = c;
        }
    }
    return r;
}

bool RateEstimate::any_recovering() const {
    for (bool b : recovering)
        if (b) return true;
    return false;
}

RateEstimate rate_from_history(const std::vector<ParameterSnapshot>& history) {
    require(history.size() >= 2, "rate_from_history: need at least two snapshots");
    for (std::size_t k = 0; k < history.size(); ++k) {
        require(std::isfinite(history[k].t_hours), "rate_from_history: non-finite time stamp");
        require(k == 0 || history[k].t_hours > history[k - 1].t_hours,
                "rate_from_history: time stamps must be strictly increasing");
    }
    const double n = static_cast<double>(history.size());
    double t_mean = 0.0;
    for (const auto& s : history) t_mean += s.t_hours;
    t_mean /= n;
    double stt = 0.0;
    for (const auto& s : history) stt += (s.t_hours - t_mean) * (s.t_hours - t_mean);

    RateEstimate est;
    for (Component c : kComponents) {
        const std::size_t i = index_of(c);
        // Offsets from the first snapshot keep a constant history exactly flat.
        const double y0 = component_values(history.front().params)[i];
        double y_mean = 0.0;
        for (const auto& s : history) y_mean += component_values(s.params)[i] - y0;
        y_mean /= n;
        double sty = 0.0;
        for (const auto& s : history) sty += (s.t_hours - t_mean) * (component_values(s.params)[i] - y0 - y_mean);
        const double slope = sty / stt;
        require(std::isfinite(slope), "rate_from_history: non-finite slope");
        est.rate[i] = degrades_downward(c) ? -slope : slope;
        est.recovering[i] = est.rate[i] < 0.0;
    }
    return est;
}

ComponentValues rates_from_consumed_life(const DegradationOutput& current, const DegradationConstants& nominal,
                                         double consumed_hours) {
    require(std::isfinite(consumed_hours) && consumed_hours >= 0.0, "consumed life must be finite and >= 0");
    ComponentValues rates{};
    if (consumed_hours == 0.0) return rates;
    const ComponentValues value = component_values(current);
    const ComponentValues nom = nominal_values(nominal);
    for (Component c : kComponents) {
        const std::size_t i = index_of(c);
        const double drift = degrades_downward(c) ? nom[i] - value[i] : value[i] - nom[i];
        rates[i] = drift / consumed_hours;
    }
    return rates;
}

TtfConsistency synthetic_ttf_consistency(const DegradationRecord& record, const DegradationConstants& constants,
                                         const FailureThresholds& thresholds) {
    const DegradationOutput d = degrade(record.input, constants);
    TtfConsistency out;
    out.label_t_failure = d.t_failure;
    const double consumed = constants.k_t * (record.input.V_in + record.input.I_in);
    const ComponentValues rates = rates_from_consumed_life(d, constants, consumed);
    const FailureReport rep = time_to_failure(d, constants, rates, thresholds);
    out.threshold_t_failure = rep.t_failure;
    out.first_failing = rep.first_failing;
    const bool a = std::isfinite(out.label_t_failure);
    const bool b = std::isfinite(out.threshold_t_failure);
    out.discrepancy = a && b ? std::abs(out.label_t_failure - out.threshold_t_failure) : kInf;
    return out;
}

}  // namespace dtwin
