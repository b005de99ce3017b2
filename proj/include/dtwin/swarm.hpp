#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dtwin/errors.hpp"
#include "dtwin/random.hpp"
#include "dtwin/types.hpp"

namespace dtwin {

template <typename Scalar>
using Objective = std::function<Scalar(const VecX<Scalar>&)>;

/// Axis-aligned search box. lower == upper in a dimension pins that coordinate.
template <typename Scalar = double>
struct Bounds {
    VecX<Scalar> lower;
    VecX<Scalar> upper;

    Eigen::Index dim() const { return lower.size(); }

    void validate() const {
        detail::require(lower.size() == upper.size() && lower.size() > 0, "Bounds: dimension mismatch or empty");
        detail::require(lower.allFinite() && upper.allFinite(), "Bounds: limits must be finite");
        detail::require((lower.array() <= upper.array()).all(), "Bounds: lower must not exceed upper");
    }

    bool contains(const VecX<Scalar>& x) const {
        return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
    }

    bool degenerate() const { return (lower.array() == upper.array()).all(); }

    /// Clamps `x` into the box in place; returns true if any coordinate moved.
    bool clamp(VecX<Scalar>& x) const {
        const bool outside = !contains(x);
        if (outside) x = x.cwiseMax(lower).cwiseMin(upper);
        return outside;
    }

    VecX<Scalar> sample(Rng& rng) const {
        VecX<Scalar> x(dim());
        for (Eigen::Index j = 0; j < dim(); ++j) x[j] = lower[j] + (upper[j] - lower[j]) * Scalar(uniform01(rng));
        return x;
    }
};

/// Monotone decreasing map from cost to fitness; in (0, 1] for non-negative cost.
template <typename Scalar>
Scalar fitness_from_cost(Scalar cost) {
    if (cost >= Scalar(0)) return Scalar(1) / (Scalar(1) + cost);
    return Scalar(1) + std::abs(cost);
}

template <typename Scalar = double>
struct Candidate {
    VecX<Scalar> position;
    Scalar cost = std::numeric_limits<Scalar>::infinity();

    Scalar fitness() const { return fitness_from_cost(cost); }
};

struct SmoConfig {
    int population = 40;
    int max_groups = 0;               // 0: max(1, population / 10)
    // Perturbation rate, scheduled linearly from pr_min to pr_max. In the local leader
    // phase each coordinate is left untouched with probability pr.
    double pr_min = 0.1;
    double pr_max = 0.1;
    int local_leader_limit = 0;       // 0: dimension * population
    int global_leader_limit = 0;      // 0: population
    int max_iterations = 200;
    double convergence_tol = 1e-4;
    bool stop_on_convergence = true;
    std::uint64_t seed = 1;

    void validate() const;
};

struct PsoConfig {
    int population = 40;
    double inertia = 0.729;
    double c1 = 1.49445;
    double c2 = 1.49445;
    int max_iterations = 200;
    double convergence_tol = 1e-4;
    bool stop_on_convergence = true;
    std::uint64_t seed = 1;

    void validate() const;
};

template <typename Scalar = double>
struct TrialStats {
    std::vector<Scalar> best_cost_history;  // best-so-far after each iteration
    int iterations_used = 0;
    int iterations_to_tol = 0;              // first iteration at or below tol, max_iterations if never
    long constraint_violations = 0;         // proposals that needed clamping
    long evaluations = 0;
    std::vector<int> group_counts;          // SMO only: groups alive at the end of each iteration
    bool success = false;
    double wall_time = 0.0;                 // seconds
};

template <typename Scalar = double>
struct OptimizeResult {
    Candidate<Scalar> best;
    TrialStats<Scalar> stats;
};

namespace detail {

template <typename Scalar>
class CountingObjective {
public:
    explicit CountingObjective(const Objective<Scalar>& f) : f_(f) {}

    Scalar operator()(const VecX<Scalar>& x) {
        ++evaluations;
        const Scalar c = f_(x);
        if (std::isnan(c) || c == -std::numeric_limits<Scalar>::infinity()) {
            std::ostringstream os;
            os << "objective returned " << c << " at [" << x.transpose() << "]";
            throw NumericalError(os.str());
        }
        return c;
    }

    long evaluations = 0;

private:
    const Objective<Scalar>& f_;
};

template <typename Scalar>
void record_iteration(TrialStats<Scalar>& s, Scalar best, int iteration, double tol) {
    s.best_cost_history.push_back(best);
    s.iterations_used = iteration;
    if (!s.success && best <= Scalar(tol)) {
        s.success = true;
        s.iterations_to_tol = iteration;
    }
}

template <typename Scalar>
OptimizeResult<Scalar> degenerate_result(const Objective<Scalar>& f, const Bounds<Scalar>& b, double tol,
                                         int max_iterations) {
    OptimizeResult<Scalar> r;
    CountingObjective<Scalar> eval(f);
    r.best.position = b.lower;
    r.best.cost = eval(b.lower);
    r.stats.evaluations = eval.evaluations;
    r.stats.iterations_to_tol = max_iterations;
    record_iteration(r.stats, r.best.cost, 1, tol);
    return r;
}

}  // namespace detail

/// Spider Monkey Optimization with fission-fusion groups.
///
/// Each iteration runs the local leader phase, the fitness-proportional global
/// leader phase, leader learning, the local leader decision (members of a stagnant
/// group are re-seeded or pushed toward the global leader) and the global leader
/// decision (split into one more group, or fuse back to one, after which all leaders
/// are re-elected from the current population). The best position ever evaluated is
/// kept aside, so the reported history is non-increasing even when leaders are
/// re-elected. Every proposal is clamped into `bounds`.
template <typename Scalar>
OptimizeResult<Scalar> smo_optimize(const Objective<Scalar>& objective, const Bounds<Scalar>& bounds,
                                    const SmoConfig& config) {
    using V = VecX<Scalar>;
    bounds.validate();
    config.validate();
    if (bounds.degenerate()) {
        return detail::degenerate_result(objective, bounds, config.convergence_tol, config.max_iterations);
    }

    const auto start = std::chrono::steady_clock::now();
    const int n = config.population;
    const Eigen::Index dim = bounds.dim();
    const int max_groups = config.max_groups > 0 ? config.max_groups : std::max(1, n / 10);
    const int ll_limit = config.local_leader_limit > 0 ? config.local_leader_limit : static_cast<int>(dim) * n;
    const int gl_limit = config.global_leader_limit > 0 ? config.global_leader_limit : n;

    Rng rng(config.seed);
    detail::CountingObjective<Scalar> eval(objective);
    OptimizeResult<Scalar> result;
    auto& stats = result.stats;
    stats.iterations_to_tol = config.max_iterations;

    std::vector<V> pos(n);
    std::vector<Scalar> cost(n);
    for (int i = 0; i < n; ++i) {
        pos[i] = bounds.sample(rng);
        cost[i] = eval(pos[i]);
    }

    struct Group {
        int begin;
        int size;
        Candidate<Scalar> leader;
        int stagnation = 0;
    };

    const auto best_in = [&](int begin, int size) {
        int b = begin;
        for (int i = begin + 1; i < begin + size; ++i)
            if (cost[i] < cost[b]) b = i;
        return Candidate<Scalar>{pos[b], cost[b]};
    };

    std::vector<Group> groups;
    const auto form_groups = [&](int count) {
        groups.clear();
        for (int g = 0; g < count; ++g) {
            const int begin = g * n / count;
            const int end = (g + 1) * n / count;
            groups.push_back({begin, end - begin, best_in(begin, end - begin), 0});
        }
    };
    form_groups(1);

    Candidate<Scalar> global = best_in(0, n);
    int global_stagnation = 0;
    Candidate<Scalar> elite = global;

    const auto propose = [&](int i, V&& trial) {
        if (bounds.clamp(trial)) ++stats.constraint_violations;
        const Scalar c = eval(trial);
        if (c < elite.cost) elite = {trial, c};
        if (c < cost[i]) {
            pos[i] = std::move(trial);
            cost[i] = c;
        }
    };

    const auto random_peer = [&](const Group& g, int i) {
        if (g.size < 2) return i;
        int r = g.begin + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(g.size - 1)));
        return r >= i ? r + 1 : r;
    };

    for (int it = 0; it < config.max_iterations; ++it) {
        const double pr = config.max_iterations > 1
                              ? config.pr_min + (config.pr_max - config.pr_min) * it / (config.max_iterations - 1)
                              : config.pr_min;

        // Local leader phase.
        for (const auto& g : groups) {
            for (int i = g.begin; i < g.begin + g.size; ++i) {
                const int r = random_peer(g, i);
                V trial = pos[i];
                for (Eigen::Index j = 0; j < dim; ++j) {
                    if (uniform01(rng) < pr) continue;
                    const Scalar r1 = Scalar(uniform01(rng));
                    const Scalar r2 = Scalar(uniform(rng, -1.0, 1.0));
                    trial[j] += r1 * (g.leader.position[j] - pos[i][j]) + r2 * (pos[r][j] - pos[i][j]);
                }
                propose(i, std::move(trial));
            }
        }

        // Global leader phase: selection probability grows with fitness. Costs are
        // divided by the population mean first so selection does not depend on units.
        Scalar scale = Scalar(0);
        int finite = 0;
        for (int i = 0; i < n; ++i) {
            if (std::isfinite(cost[i])) {
                scale += std::abs(cost[i]);
                ++finite;
            }
        }
        scale = finite > 0 && scale > Scalar(0) ? scale / Scalar(finite) : Scalar(1);
        const auto fit = [&](Scalar c) { return fitness_from_cost(c / scale); };
        Scalar max_fit = Scalar(0);
        for (int i = 0; i < n; ++i) max_fit = std::max(max_fit, fit(cost[i]));
        for (const auto& g : groups) {
            int updates = 0;
            int i = g.begin;
            while (updates < g.size) {
                const Scalar prob =
                    max_fit > Scalar(0) ? Scalar(0.9) * fit(cost[i]) / max_fit + Scalar(0.1) : Scalar(1);
                if (Scalar(uniform01(rng)) < prob) {
                    ++updates;
                    const auto j = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(dim)));
                    const int r = random_peer(g, i);
                    V trial = pos[i];
                    trial[j] += Scalar(uniform01(rng)) * (global.position[j] - pos[i][j]) +
                                Scalar(uniform(rng, -1.0, 1.0)) * (pos[r][j] - pos[i][j]);
                    propose(i, std::move(trial));
                }
                if (++i == g.begin + g.size) i = g.begin;
            }
        }

        // Global and local leader learning.
        const auto best = best_in(0, n);
        if (best.cost < global.cost) {
            global = best;
            global_stagnation = 0;
        } else {
            ++global_stagnation;
        }
        for (auto& g : groups) {
            const auto b = best_in(g.begin, g.size);
            if (b.cost < g.leader.cost) {
                g.leader = b;
                g.stagnation = 0;
            } else {
                ++g.stagnation;
            }
        }

        // Local leader decision.
        for (auto& g : groups) {
            if (g.stagnation <= ll_limit) continue;
            g.stagnation = 0;
            for (int i = g.begin; i < g.begin + g.size; ++i) {
                V trial;
                if (uniform01(rng) < 0.5) {
                    trial = bounds.sample(rng);
                } else {
                    trial = pos[i];
                    for (Eigen::Index j = 0; j < dim; ++j) {
                        trial[j] += Scalar(uniform01(rng)) * (global.position[j] - pos[i][j]) +
                                    Scalar(uniform01(rng)) * (pos[i][j] - g.leader.position[j]);
                    }
                    if (bounds.clamp(trial)) ++stats.constraint_violations;
                }
                cost[i] = eval(trial);
                pos[i] = std::move(trial);
                if (cost[i] < elite.cost) elite = {pos[i], cost[i]};
            }
            g.leader = best_in(g.begin, g.size);
        }

        // Global leader decision: fission up to max_groups, then fusion.
        if (global_stagnation > gl_limit) {
            global_stagnation = 0;
            const int count = static_cast<int>(groups.size());
            form_groups(count < max_groups ? count + 1 : 1);
            global = best_in(0, n);
        }

        stats.group_counts.push_back(static_cast<int>(groups.size()));
        detail::record_iteration(stats, elite.cost, it + 1, config.convergence_tol);
        if (config.stop_on_convergence && stats.success) break;
    }

    stats.evaluations = eval.evaluations;
    stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.best = std::move(elite);
    return result;
}

/// Global-best PSO with inertia weight. Initial velocities are half the distance to a
/// second random point; positions leaving the box are clamped and the offending
/// velocity components zeroed.
template <typename Scalar>
OptimizeResult<Scalar> pso_optimize(const Objective<Scalar>& objective, const Bounds<Scalar>& bounds,
                                    const PsoConfig& config) {
    using V = VecX<Scalar>;
    bounds.validate();
    config.validate();
    if (bounds.degenerate()) {
        return detail::degenerate_result(objective, bounds, config.convergence_tol, config.max_iterations);
    }

    const auto start = std::chrono::steady_clock::now();
    const int n = config.population;
    const Eigen::Index dim = bounds.dim();
    const V vmax = bounds.upper - bounds.lower;

    Rng rng(config.seed);
    detail::CountingObjective<Scalar> eval(objective);
    OptimizeResult<Scalar> result;
    auto& stats = result.stats;
    stats.iterations_to_tol = config.max_iterations;

    std::vector<V> x(n), v(n, V::Zero(dim));
    std::vector<Candidate<Scalar>> personal(n);
    Candidate<Scalar> global;
    for (int i = 0; i < n; ++i) {
        x[i] = bounds.sample(rng);
        v[i] = (bounds.sample(rng) - x[i]) / Scalar(2);
        personal[i] = {x[i], eval(x[i])};
        if (personal[i].cost < global.cost) global = personal[i];
    }

    for (int it = 0; it < config.max_iterations; ++it) {
        const Candidate<Scalar> leader = global;
        for (int i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < dim; ++j) {
                const Scalar r1 = Scalar(uniform01(rng));
                const Scalar r2 = Scalar(uniform01(rng));
                v[i][j] = Scalar(config.inertia) * v[i][j] +
                          Scalar(config.c1) * r1 * (personal[i].position[j] - x[i][j]) +
                          Scalar(config.c2) * r2 * (leader.position[j] - x[i][j]);
                v[i][j] = std::clamp(v[i][j], -vmax[j], vmax[j]);
            }
            x[i] += v[i];
            if (!bounds.contains(x[i])) {
                ++stats.constraint_violations;
                for (Eigen::Index j = 0; j < dim; ++j) {
                    if (x[i][j] < bounds.lower[j] || x[i][j] > bounds.upper[j]) {
                        x[i][j] = std::clamp(x[i][j], bounds.lower[j], bounds.upper[j]);
                        v[i][j] = Scalar(0);
                    }
                }
            }
            const Scalar c = eval(x[i]);
            if (c < personal[i].cost) personal[i] = {x[i], c};
            if (c < global.cost) global = {x[i], c};
        }
        detail::record_iteration(stats, global.cost, it + 1, config.convergence_tol);
        if (config.stop_on_convergence && stats.success) break;
    }

    stats.evaluations = eval.evaluations;
    stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.best = std::move(global);
    return result;
}

enum class Algorithm { SMO, PSO };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

/// Algorithm choice plus both configurations; the unused one is ignored.
struct OptimizerSpec {
    Algorithm algorithm = Algorithm::SMO;
    SmoConfig smo;
    PsoConfig pso;

    std::uint64_t seed() const { return algorithm == Algorithm::SMO ? smo.seed : pso.seed; }
    int max_iterations() const { return algorithm == Algorithm::SMO ? smo.max_iterations : pso.max_iterations; }
    OptimizerSpec with_seed(std::uint64_t s) const;
};

template <typename Scalar>
OptimizeResult<Scalar> optimize(const Objective<Scalar>& f, const Bounds<Scalar>& b, const OptimizerSpec& spec) {
    return spec.algorithm == Algorithm::SMO ? smo_optimize(f, b, spec.smo) : pso_optimize(f, b, spec.pso);
}

template <typename Scalar = double>
struct TrialRecord {
    int trial = 0;
    std::uint64_t seed = 0;
    OptimizeResult<Scalar> result;
};

template <typename Scalar = double>
struct TrialSummary {
    Algorithm algorithm = Algorithm::SMO;
    std::vector<TrialRecord<Scalar>> trials;
    double success_rate = 0.0;
    double mean_iterations_to_tol = 0.0;
    long total_violations = 0;
    long total_evaluations = 0;
};

/// Runs `n_trials` independent optimizations; trial k uses derive_seed(spec.seed(), k).
template <typename Scalar>
TrialSummary<Scalar> run_trials(const Objective<Scalar>& f, const Bounds<Scalar>& b, const OptimizerSpec& spec,
                                int n_trials) {
    detail::require(n_trials >= 1, "run_trials: n_trials must be >= 1");
    TrialSummary<Scalar> s;
    s.algorithm = spec.algorithm;
    int successes = 0;
    double iters = 0.0;
    for (int k = 0; k < n_trials; ++k) {
        const std::uint64_t seed = derive_seed(spec.seed(), static_cast<std::uint64_t>(k));
        auto r = optimize(f, b, spec.with_seed(seed));
        successes += r.stats.success ? 1 : 0;
        iters += r.stats.iterations_to_tol;
        s.total_violations += r.stats.constraint_violations;
        s.total_evaluations += r.stats.evaluations;
        s.trials.push_back({k, seed, std::move(r)});
    }
    s.success_rate = static_cast<double>(successes) / n_trials;
    s.mean_iterations_to_tol = iters / n_trials;
    return s;
}

extern template OptimizeResult<double> smo_optimize(const Objective<double>&, const Bounds<double>&,
                                                    const SmoConfig&);
extern template OptimizeResult<double> pso_optimize(const Objective<double>&, const Bounds<double>&,
                                                    const PsoConfig&);
extern template TrialSummary<double> run_trials(const Objective<double>&, const Bounds<double>&,
                                                const OptimizerSpec&, int);

// Analytic benchmark objectives, global minimum 0 at the origin.
template <typename Scalar>
Scalar sphere(const VecX<Scalar>& x) {
    return x.squaredNorm();
}

template <typename Scalar>
Scalar rastrigin(const VecX<Scalar>& x) {
    constexpr double two_pi = 6.283185307179586476925;
    Scalar s = Scalar(10) * Scalar(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) s += x[j] * x[j] - Scalar(10) * std::cos(Scalar(two_pi) * x[j]);
    return s;
}

}  // namespace dtwin
