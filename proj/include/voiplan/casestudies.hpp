#pragma once
// The two built-in inspection-and-maintenance case studies:
//
//  1. A stationary three-component system. Each component has 3 condition
//     levels with its own deterioration matrix and a shared repair matrix;
//     components deteriorate independently and are coupled only through
//     system-level penalty costs on joint condition configurations. The
//     default channel is uninformative ("blind"); per-component inspections
//     report the component's condition with tunable accuracy p.
//       Setting 1: per component, repair yes/no and observe yes/no — 8 joint
//                  maintenance actions x 8 observe subsets = 64 pairs.
//       Setting 2: the full-system channel arrives free every step — 8
//                  maintenance actions, one forced observation action.
//
//  2. A corroding deck. Condition (4 levels) x deterioration rate (83 bins)
//     x time step, plus one absorbing terminal state reached at the horizon.
//     Without repair the condition moves at most one level per step (a
//     bidiagonal block per rate bin) and the rate bin advances by one; minor
//     repair improves the condition but leaves the rate dynamics alone;
//     major repair improves the condition and moves the rate back 3 bins;
//     replacement restarts condition and rate. Rate and time evolve
//     deterministically, so along any action history the belief spreads only
//     across condition levels. Per-rate transition probabilities are inputs;
//     a seeded generator synthesizes a plausible monotone-in-rate family for
//     experiments.
//       Setting 1: {none, minor, major} x {none, visual, monitoring} plus
//                  replace-without-observation — 10 allowed pairs.
//       Setting 2: 4 maintenance actions, monitoring channel free every step.
//
// Also includes the restricted condition-triggered repair policy family for
// the three-component system (repair a component iff its observed condition
// is in a fixed set, identically across components), evaluated exactly by a
// linear solve — the family on which better observations can genuinely
// produce a worse optimum.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "voiplan/model.hpp"

namespace voiplan {

// ---------------------------------------------------------------------------
// Three-component system
// ---------------------------------------------------------------------------

// Per-component data: deterioration/repair dynamics and per-condition costs.
struct ComponentSpec {
    std::size_t condition_count = 3;
    std::vector<DenseMat> p_do_nothing;  // one 3x3 matrix per component
    DenseMat p_repair;                   // shared 3x3
    std::vector<double> repair_cost;     // per condition, <= 0
    std::vector<double> observe_cost;    // per condition, <= 0
    std::vector<double> damage_cost;     // per condition, <= 0

    static ComponentSpec standard();
};

// System-level penalties on the multiset of component conditions.
struct SystemPenaltyTable {
    // penalty(c) for the ascending-sorted triple of 0-based condition levels
    double penalty(std::array<int, 3> sorted_conditions) const;

    static SystemPenaltyTable standard();

    struct Entry {
        std::array<int, 3> conditions;  // ascending, 0-based
        double value;                   // <= 0
    };
    std::vector<Entry> entries;
};

// The per-component inspection channel: correct condition with probability p,
// either wrong condition with probability (1-p)/2 each.
DenseMat component_observation_matrix(double p);

// Builds the 27-state joint model. setting is 1 (optional inspections,
// 8 x 8 action pairs) or 2 (free always-on full-system channel, 8 actions).
// Joint indices are base-3/base-2 with component 1 most significant; action
// pair (0,0) is do-nothing/observe-nothing. The initial state is every
// component in its best condition.
PomdpModel build_three_component(double p, int setting);

// Replaces the default channel of a three-component model with the
// accuracy-q full-system condition channel (27 outcomes), making every step
// report all component conditions for free. Used for observation-conditioned
// policy processes and informative-default experiments.
PomdpModel with_condition_default_channel(PomdpModel model, double q);

// ---------------------------------------------------------------------------
// Corroding deck
// ---------------------------------------------------------------------------

struct DeckModelSpec {
    std::size_t condition_count = 4;
    std::size_t rate_count = 83;
    std::size_t horizon = 42;  // decision steps before the absorbing terminal

    // Uncontrolled dynamics: per rate bin, the probability that condition i
    // stays (stay.at(rate, i)) or moves to i+1 (advance.at(rate, i)). Rows
    // must satisfy stay + advance = 1, with advance = 0 at the worst
    // condition.
    DenseMat stay;     // rate_count x condition_count
    DenseMat advance;  // rate_count x condition_count

    DenseMat minor_block;  // condition_count^2, condition transition under minor repair
    DenseMat major_block;  // condition_count^2, condition transition under major repair
    DenseMat visual_obs;   // condition_count x condition_count
    DenseMat monitor_obs;  // condition_count x condition_count

    std::vector<double> minor_cost;    // per condition, <= 0
    std::vector<double> major_cost;    // per condition, <= 0
    std::vector<double> replace_cost;  // per condition, <= 0
    std::vector<double> damage_cost;   // per condition, <= 0
    double visual_cost = -4.5;
    double monitor_cost = -7.5;
    double discount = 0.95;

    std::size_t num_states() const { return condition_count * rate_count * horizon + 1; }

    // Throws SpecInvariantViolation on any structural defect.
    void validate() const;
};

struct DeckShape {
    std::size_t rate_count = 83;
    std::size_t horizon = 42;
    // advance probability per condition level at the first and last rate bin
    std::array<double, 3> advance_start{0.03, 0.02, 0.01};
    std::array<double, 3> advance_end{0.45, 0.35, 0.20};
    double jitter = 0.25;  // relative roughness of the monotone ramp
};

// Seeded synthetic per-rate transition family: advance probabilities are
// strictly increasing in the rate bin between the given endpoints. The
// numbers are generated, not measured.
DeckModelSpec synth_deck_spec(std::uint64_t seed, const DeckShape& shape = DeckShape{});

// Builds the flat time-augmented model. State index:
//   ((t * rate_count) + rate) * condition_count + condition,
// terminal last. setting is 1 (10 allowed pairs) or 2 (4 actions, free
// monitoring channel). All actions from the last time step, and from the
// terminal itself, lead to the terminal at zero reward.
PomdpModel build_deck_model(const DeckModelSpec& spec, int setting);

// ---------------------------------------------------------------------------
// Condition-triggered repair policies (three-component system)
// ---------------------------------------------------------------------------

// Repair a component iff its observed condition level is flagged; the same
// rule applies to every component.
struct ConditionBasedPolicy {
    std::array<std::uint8_t, 3> repair_when{0, 0, 0};  // indexed by 0-based condition

    std::string name() const;
};

// All 2^3 = 8 rules, in increasing bitmask order (bit = condition level).
std::vector<ConditionBasedPolicy> enumerate_condition_policies();

// Exact value of following the rule forever, starting from the model's
// initial state: each step the current conditions are observed through the
// accuracy-p channel (free), the rule picks the joint repair action, and
// maintenance + damage + system-penalty costs accrue. Solved as a linear
// fixed point on the 27 joint states; `model` supplies dynamics and rewards
// (build_three_component with any p works — the p used for the policy's
// observations is the `p` argument).
double evaluate_condition_policy(const PomdpModel& model, double p,
                                 const ConditionBasedPolicy& policy);

struct PolicyEvaluation {
    ConditionBasedPolicy policy;
    double value;
};

// Evaluates all 8 rules; returns them in enumeration order.
std::vector<PolicyEvaluation> evaluate_condition_policies(const PomdpModel& model, double p);

// Index of the best (largest value, ties to lowest index) entry.
std::size_t best_condition_policy(const std::vector<PolicyEvaluation>& evals);

}  // namespace voiplan
