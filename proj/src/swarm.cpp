#include "dtwin/swarm.hpp"

namespace dtwin {

using detail::require;

void SmoConfig::validate() const {
    require(population >= 4, "SmoConfig: population must be >= 4");
    require(max_groups >= 0 && max_groups <= population / 4, "SmoConfig: max_groups must lie in [1, population / 4]");
    require(pr_min >= 0.1 && pr_max <= 0.9 && pr_min <= pr_max, "SmoConfig: perturbation range must lie in [0.1, 0.9]");
    require(local_leader_limit >= 0 && global_leader_limit >= 0, "SmoConfig: leader limits must be >= 0");
    require(max_iterations >= 1, "SmoConfig: max_iterations must be >= 1");
    require(convergence_tol >= 0, "SmoConfig: convergence_tol must be >= 0");
}

void PsoConfig::validate() const {
    require(population >= 2, "PsoConfig: population must be >= 2");
    require(inertia >= 0 && c1 >= 0 && c2 >= 0, "PsoConfig: coefficients must be >= 0");
    require(max_iterations >= 1, "PsoConfig: max_iterations must be >= 1");
    require(convergence_tol >= 0, "PsoConfig: convergence_tol must be >= 0");
}

std::string to_string(Algorithm a) { return a == Algorithm::SMO ? "smo" : "pso"; }

Algorithm parse_algorithm(const std::string& s) {
    if (s == "smo" || s == "SMO") return Algorithm::SMO;
    if (s == "pso" || s == "PSO") return Algorithm::PSO;
    throw ValidationError("unknown algorithm '" + s + "' (expected smo or pso)");
}

OptimizerSpec OptimizerSpec::with_seed(std::uint64_t s) const {
    OptimizerSpec out = *this;
    out.smo.seed = s;
    out.pso.seed = s;
    return out;
}

template OptimizeResult<double> smo_optimize(const Objective<double>&, const Bounds<double>&, const SmoConfig&);
template OptimizeResult<double> pso_optimize(const Objective<double>&, const Bounds<double>&, const PsoConfig&);
template TrialSummary<double> run_trials(const Objective<double>&, const Bounds<double>&, const OptimizerSpec&, int);

}  // namespace dtwin
