#pragma once
// Derived control settings and value-of-information metrics.
//
// A maintenance POMDP can be re-posed with a different observation side while
// keeping every maintenance-related element (states, discount, maintenance
// actions, transitions, maintenance/damage rewards, and the default
// observation channel) fixed. Comparing optimal values across such settings
// prices the observation scheme itself:
//
//   - make_default : no optional observations at all (only the default
//     channel arrives each step). Its value is the baseline V_def.
//   - make_perm    : one chosen observation channel arrives every step, for
//     free. Models permanently installed monitoring.
//   - make_mdp     : the state is revealed exactly every step, for free.
//     The problem collapses to the underlying MDP.
//
// Life-cycle metrics are differences of root values between two compatible
// settings, each solved to a known gap; the reported uncertainty is the sum
// of the two gaps. Step metrics price a single observation decision at a
// fixed belief against a frozen value function (the solver's lower bound).
//
// Sign conventions: all rewards are costs (<= 0), so values are <= 0 and the
// gains below are improvements toward zero. Observation costs incurred at
// arrival time are discounted once (see model.hpp); the step-metric algebra
// below mirrors that convention so the reformulated Bellman operator matches
// the direct one to floating-point accuracy.

#include <cstdint>
#include <string>

#include "voiplan/bounds.hpp"
#include "voiplan/model.hpp"
#include "voiplan/solvers.hpp"

namespace voiplan {

enum class Provenance { original, default_derived, perm_derived, mdp_derived, explicit_setting };

const char* provenance_name(Provenance p);

// A labeled POMDP posed as one observation setting of a shared maintenance
// problem.
struct ControlSetting {
    std::string label;
    PomdpModel model;
    Provenance provenance = Provenance::explicit_setting;
};

// Result of solving one setting at one root belief.
struct ValueReport {
    std::string label;
    Belief root;
    double value = 0.0;  // lower bound at the root
    double gap = 0.0;    // upper - lower at the root, >= 0
    std::uint64_t config_digest = 0;
};

// A difference of two settings' root values, with its error budget.
struct GainResult {
    double gain = 0.0;         // value(second) - value(first)
    double uncertainty = 0.0;  // gap(first) + gap(second)
    ValueReport first, second;
};

std::uint64_t solver_config_digest(const SolverConfig& config, SolverKind kind);

// True when the two models agree on every maintenance-side element: state
// count, discount, maintenance actions, transition matrices, maintenance and
// damage rewards, and the default observation channel.
bool maintenance_elements_match(const PomdpModel& a, const PomdpModel& b, double tol = 1e-12);

// Strip all optional observations: the single remaining observation action is
// trivial (unit observation set, zero cost), so each step only the default
// channel is received. A model that is already of this shape is returned
// unchanged.
ControlSetting make_default(const PomdpModel& model);

// Keep exactly one nontrivial observation channel and make it free: the
// chosen action's observation matrix is retained, its cost column is zeroed,
// and every maintenance action may (only) pair with it. Throws
// TrivialActionSelected when the chosen action carries no information and no
// cost to begin with.
ControlSetting make_perm(const PomdpModel& model, std::size_t a_o);

// Perfect information every step: a single free observation action whose
// observation matrix is the identity on states.
ControlSetting make_mdp(const PomdpModel& model);

// Expected value (under `values`) after taking a_M from b and updating on the
// default channel alone: sum over o_e of p(o_e) * V(b^{a_M, o_e}).
double default_channel_expectation(const PomdpModel& model,
                                   const std::vector<AlphaVector>& values, const Belief& b,
                                   std::size_t a_m);

// One-step value of observing: the expected post-update value when o_O from
// a_O arrives alongside the default observation, minus the expected value
// when only the default observation arrives. Evaluated on the frozen lower
// value function in `bounds`. Zero-probability branches carry zero weight.
double step_voi(const PomdpModel& model, const ValueBounds& bounds, const Belief& b,
                std::size_t a_m, std::size_t a_o);

// One-step value of perfect information: expected corner value of the
// predicted state distribution minus the default-channel expectation. Always
// >= step_voi for any a_O when the value function is convex.
double step_vopi(const PomdpModel& model, const ValueBounds& bounds, const Belief& b,
                 std::size_t a_m);

// step_voi minus the magnitude of the (undiscounted) expected observation
// cost b . R_O[a_O].
double net_step_voi(const PomdpModel& model, const ValueBounds& bounds, const Belief& b,
                    std::size_t a_m, std::size_t a_o);

// The one-step Bellman right-hand side at b, written through net_step_voi:
//   max over a_M of { b.(R_M + R_D) + gamma * ( E_default[V] + max over
//   allowed a_O of netVoI_step(a_O) ) }.
// Algebraically identical to bellman_direct below; both are exposed so the
// identity is testable.
double bellman_via_netvoi(const PomdpModel& model, const ValueBounds& bounds, const Belief& b);

// The one-step Bellman right-hand side computed the plain way: max over
// allowed pairs of expected reward plus discounted expected successor value.
double bellman_direct(const PomdpModel& model, const ValueBounds& bounds, const Belief& b);

// Solve both settings (same solver kind and config) at b and difference the
// root values: gain = V_second(b) - V_first(b), uncertainty = sum of gaps.
// Throws IncompatibleSettings when the maintenance-side elements differ.
GainResult life_cycle_gain(const ControlSetting& first, const ControlSetting& second,
                           const Belief& b, const SolverConfig& config,
                           SolverKind kind = SolverKind::gap);

// Value of the model's observation scheme: V_model(b) - V_default(b).
GainResult voi(const PomdpModel& model, const Belief& b, const SolverConfig& config,
               SolverKind kind = SolverKind::gap);

// Value of perfect information: V_MDP(b) - V_default(b). The fully observed
// side uses the exact MDP fixed point (first action chosen under the belief,
// full observability afterwards), so only the default side contributes
// uncertainty.
GainResult vopi(const PomdpModel& model, const Belief& b, const SolverConfig& config,
                SolverKind kind = SolverKind::gap);

// Value of permanently installed monitoring relative to optional inspections:
// V_perm(b) - V_optional(b). Can be negative when the optional inspections
// are more informative than the permanent channel.
GainResult voshm(const ControlSetting& optional_setting, const ControlSetting& perm_setting,
                 const Belief& b, const SolverConfig& config,
                 SolverKind kind = SolverKind::gap);

// Relative value of continuous (free, every-step) availability of channel
// a_O against the model as posed: V_perm(a_O)(b) - V_model(b). Nonnegative
// whenever a_O is the model's only informative optional channel: the derived
// setting then receives at least the information of any original policy and
// never pays for it.
GainResult rvoci(const PomdpModel& model, std::size_t a_o, const Belief& b,
                 const SolverConfig& config, SolverKind kind = SolverKind::gap);

}  // namespace voiplan
