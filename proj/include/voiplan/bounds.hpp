#pragma once
// Lower/upper value-function bounds shared by all solvers.
//
// Lower bound: a set of alpha-vectors (max of hyperplanes).
// Upper bound: values at the simplex corners plus interior (belief, value)
// points combined by the sawtooth interpolation.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "voiplan/model.hpp"

namespace voiplan {

struct UpperPoint {
    Belief b;
    double v = 0.0;
};

// One per-iteration convergence record (CSV-friendly).
struct ConvergenceRecord {
    std::size_t iteration = 0;
    double wall_seconds = 0.0;
    double lower_root = 0.0;
    double upper_root = 0.0;
    std::size_t num_alpha = 0;
    std::size_t num_beliefs = 0;
};

struct ValueBounds {
    std::vector<AlphaVector> lower;
    std::vector<double> upper_corners;
    std::vector<UpperPoint> upper_points;

    // Capacity cap for upper_points; dominated points are evicted on insert.
    std::size_t upper_point_cap = 10000;

    bool budget_exhausted = false;
    std::vector<ConvergenceRecord> log;

    double lower_value(const Belief& b) const;
    std::pair<double, std::size_t> lower_value_argmax(const Belief& b) const;
    double upper_value(const Belief& b) const;  // sawtooth
    double gap(const Belief& b) const { return upper_value(b) - lower_value(b); }

    // Internal caches for the sawtooth interpolation; maintained by
    // add_upper_point / rebuild_upper_cache.
    std::vector<double> point_excess;  // v_i - b_i . upper_corners
    std::unordered_map<std::uint64_t, std::size_t> point_index;  // belief-bytes hash -> index
    void rebuild_upper_cache();
};

struct SolverConfig {
    double epsilon = 1e-3;          // convergence gap target at the root belief
    std::size_t max_iterations = 1000000;  // sweeps (Perseus/PBVI) or trials (gap)
    double max_wall_seconds = 1e18;
    std::size_t belief_set_size = 500;     // Perseus/PBVI collection cap
    std::size_t trajectory_length = 200;   // collection walk length / trial depth cap
    std::uint64_t exploration_seed = 1;
    double pruning_tolerance = 1e-12;
    std::size_t upper_point_cap = 10000;

    void validate() const;
};

// One Bellman improvement of the lower bound at belief b; returns the new
// alpha-vector tagged with its greedy action pair. Requires a non-empty lower
// set. Zero-likelihood observation branches are skipped for posterior
// evaluation; their model-sum contribution uses the lowest-index alpha.
AlphaVector backup(const PomdpModel& model, const ValueBounds& bounds, const Belief& b);

// Per-maintenance-action fixed-point evaluation (paired with the cheapest
// allowed observation action). Each vector lower-bounds the optimal value;
// iterates converge from below so truncation keeps validity.
std::vector<AlphaVector> blind_lower_bound(const PomdpModel& model);

// Fully observable (MDP) optimal values per state; valid upper bound on the
// POMDP value at corners. Iterates converge from above (costs are <= 0), so
// truncation keeps validity. Observation costs do not apply (perfect
// information needs no inspections).
std::vector<double> mdp_value_iteration(const PomdpModel& model);

// H-step finite-horizon MDP values (exact, H sweeps from zero).
std::vector<double> mdp_finite_horizon(const PomdpModel& model, std::size_t horizon);

// Value of the fully-observable relaxation at a belief: the first action is
// chosen under the belief, full observability afterwards:
//   max_a { b.(R_M[a] + R_D) + discount * b_pred(a) . V }
double mdp_value_at_belief(const PomdpModel& model, const std::vector<double>& v_mdp,
                           const Belief& b);

// Sawtooth upper-bound interpolation at b.
double sawtooth_value(const ValueBounds& bounds, const Belief& b);
// Same, on a raw probability vector (avoids Belief temporaries in hot loops).
double sawtooth_value(const ValueBounds& bounds, const double* p, std::size_t n);

// Insert (b, v) into the upper point set: keeps the minimum at duplicate
// beliefs, skips points that tighten nothing, evicts when over capacity.
void add_upper_point(ValueBounds& bounds, const Belief& b, double v);

// Drop upper points that tighten the sawtooth by at most tol over the
// corners and the points kept before them (insertion order). Dropping points
// can only loosen the bound, and by at most tol per query, so validity is
// preserved.
void prune_upper_points(ValueBounds& bounds, double tol);

// Initialize bounds for a solve: blind lower set, MDP corner upper bound.
ValueBounds initial_bounds(const PomdpModel& model);

}  // namespace voiplan
