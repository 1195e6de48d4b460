#pragma once
// Monte Carlo life-cycle simulation: rollouts of a policy through the true
// (sampled) state process, with the agent's belief tracked alongside so
// belief-dependent policies can act.
//
// Reward accounting follows the model's cost decomposition: at step t the
// maintenance and damage costs of the current state are weighted gamma^t,
// and the chosen observation action's cost gamma^(t+1) — the observation
// outcome only arrives at the next epoch (same convention as
// expected_reward, so simulated returns estimate the solver's objective).
//
// Determinism: episode e draws from an RNG stream split off the master seed
// by the episode index, so results are bit-identical for a given seed no
// matter how episodes are scheduled across threads.

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "voiplan/bounds.hpp"
#include "voiplan/casestudies.hpp"
#include "voiplan/model.hpp"

namespace voiplan {

// What a policy may look at when choosing its action pair.
struct StepContext {
    const PomdpModel& model;
    const Belief& belief;  // posterior before acting at step t
    std::size_t t = 0;
    bool has_observation = false;  // false before anything was observed
    JointObservation last_obs;     // valid when has_observation
    std::size_t last_a_o = 0;      // observation action that produced last_obs
};

class Policy {
  public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    // Returns an allowed (a_m, a_o) pair for the context.
    virtual std::pair<std::size_t, std::size_t> act(const StepContext& ctx) = 0;
};

// Follows the action tags of the maximizing lower-bound vector at the
// current belief ("the policy described by the lower bound").
class GreedyPolicy final : public Policy {
  public:
    explicit GreedyPolicy(const ValueBounds& bounds) : bounds_(&bounds) {}
    std::string name() const override { return "greedy"; }
    std::pair<std::size_t, std::size_t> act(const StepContext& ctx) override;

  private:
    const ValueBounds* bounds_;
};

// Applies a condition-triggered repair rule to the component conditions
// decoded from the latest default observation (three-component models with a
// full-system condition channel as default). Missing observations are
// treated as best-condition everywhere. Observation action: cheapest allowed
// for the chosen repair.
class ConditionObservationPolicy final : public Policy {
  public:
    explicit ConditionObservationPolicy(ConditionBasedPolicy rule) : rule_(rule) {}
    std::string name() const override { return rule_.name(); }
    std::pair<std::size_t, std::size_t> act(const StepContext& ctx) override;

  private:
    ConditionBasedPolicy rule_;
};

// Maintenance action 0 with its cheapest allowed observation action.
class DoNothingPolicy final : public Policy {
  public:
    std::string name() const override { return "do-nothing"; }
    std::pair<std::size_t, std::size_t> act(const StepContext& ctx) override;
};

// The last (heaviest) maintenance action with its cheapest allowed
// observation action.
class AlwaysRepairPolicy final : public Policy {
  public:
    std::string name() const override { return "always-repair"; }
    std::pair<std::size_t, std::size_t> act(const StepContext& ctx) override;
};

// Plays a fixed schedule of action pairs by step index, repeating the last
// entry forever.
class ScriptedPolicy final : public Policy {
  public:
    explicit ScriptedPolicy(std::vector<std::pair<std::size_t, std::size_t>> steps)
        : steps_(std::move(steps)) {}
    std::string name() const override { return "scripted"; }
    std::pair<std::size_t, std::size_t> act(const StepContext& ctx) override;

  private:
    std::vector<std::pair<std::size_t, std::size_t>> steps_;
};

struct RolloutConfig {
    std::size_t episodes = 1000;  // >= 2
    std::size_t horizon = 0;      // 0: default_truncation_horizon(model)
    std::uint64_t seed = 1;
    double confidence = 0.95;  // one of 0.90, 0.95, 0.99
    bool keep_returns = false;
    // Draw a default-channel observation of the initial state before the
    // first action (observation-conditioned processes start informed).
    bool initial_observation = false;
    std::size_t threads = 1;

    void validate() const;
};

struct RolloutResult {
    std::size_t episodes = 0;
    std::size_t horizon = 0;
    double mean = 0.0;
    double std_error = 0.0;
    double confidence = 0.95;
    double ci_halfwidth = 0.0;  // z * std_error
    double min_return = 0.0;
    double max_return = 0.0;
    std::vector<double> returns;  // filled when keep_returns
};

struct TraceStep {
    std::size_t t = 0;
    std::size_t true_state = 0;
    Belief belief;  // before acting
    std::size_t a_m = 0;
    std::size_t a_o = 0;
    JointObservation obs;      // received after acting
    double step_reward = 0.0;  // r_M + r_D + discount * r_O at the true state
};

using PolicyTrace = std::vector<TraceStep>;

// z multiplier for the supported confidence presets; throws
// SpecInvariantViolation otherwise.
double confidence_z(double confidence);

// Smallest H with discount^H * max_step_cost / (1 - discount) below the
// resolution; max_step_cost bounds |r| by the sum of per-part maxima.
std::size_t default_truncation_horizon(const PomdpModel& model, double resolution = 0.01);

// The truncation error bound itself, for reporting.
double truncation_error_bound(const PomdpModel& model, std::size_t horizon);

RolloutResult rollout(const PomdpModel& model, Policy& policy, const Belief& b0,
                      const RolloutConfig& config);

PolicyTrace trace_realization(const PomdpModel& model, Policy& policy, const Belief& b0,
                              std::uint64_t seed, std::size_t horizon,
                              bool initial_observation = false);

struct MetricEstimate {
    double difference = 0.0;  // mean(second) - mean(first)
    double ci_halfwidth = 0.0;
    RolloutResult first, second;
};

// Paired difference estimate: both sides run with the same master seed (so
// identical inputs cancel exactly); the CI combines the two standard errors.
MetricEstimate estimate_metric_by_simulation(const PomdpModel& first_model,
                                             Policy& first_policy,
                                             const PomdpModel& second_model,
                                             Policy& second_policy, const Belief& b0,
                                             const RolloutConfig& config);

}  // namespace voiplan
