#include "voiplan/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "voiplan/belief.hpp"
#include "voiplan/errors.hpp"
#include "voiplan/rng.hpp"

namespace voiplan {

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

std::pair<std::size_t, std::size_t> GreedyPolicy::act(const StepContext& ctx) {
    const auto [value, idx] = value_of_belief(bounds_->lower, ctx.belief);
    (void)value;
    const AlphaVector& a = bounds_->lower[idx];
    return {static_cast<std::size_t>(a.a_m), static_cast<std::size_t>(a.a_o)};
}

std::pair<std::size_t, std::size_t> ConditionObservationPolicy::act(const StepContext& ctx) {
    const PomdpModel& m = ctx.model;
    if (m.num_states() != 27 || m.num_maint() != 8)
        throw SpecInvariantViolation(
            "condition policy: expects the 27-state three-component model");
    std::size_t o = 0;  // best condition everywhere when nothing was seen yet
    if (ctx.has_observation) {
        if (m.num_default_obs() != 27)
            throw SpecInvariantViolation(
                "condition policy: needs the full-system condition default channel");
        o = ctx.last_obs.default_index;
    }
    const int oc1 = static_cast<int>(o / 9), oc2 = static_cast<int>((o / 3) % 3),
              oc3 = static_cast<int>(o % 3);
    const std::size_t mask = (rule_.repair_when[oc1] ? 4u : 0u) +
                             (rule_.repair_when[oc2] ? 2u : 0u) +
                             (rule_.repair_when[oc3] ? 1u : 0u);
    return {mask, m.cheapest_obs_action_for(mask)};
}

std::pair<std::size_t, std::size_t> DoNothingPolicy::act(const StepContext& ctx) {
    return {0, ctx.model.cheapest_obs_action_for(0)};
}

std::pair<std::size_t, std::size_t> AlwaysRepairPolicy::act(const StepContext& ctx) {
    const std::size_t a_m = ctx.model.num_maint() - 1;
    return {a_m, ctx.model.cheapest_obs_action_for(a_m)};
}

std::pair<std::size_t, std::size_t> ScriptedPolicy::act(const StepContext& ctx) {
    if (steps_.empty()) throw SpecInvariantViolation("scripted policy: empty schedule");
    return steps_[std::min(ctx.t, steps_.size() - 1)];
}

// ---------------------------------------------------------------------------
// Configuration helpers
// ---------------------------------------------------------------------------

double confidence_z(double confidence) {
    if (confidence == 0.90) return 1.6448536269514722;
    if (confidence == 0.95) return 1.959963984540054;
    if (confidence == 0.99) return 2.5758293035489004;
    throw SpecInvariantViolation("confidence level must be one of 0.90, 0.95, 0.99");
}

void RolloutConfig::validate() const {
    if (episodes < 2)
        throw SpecInvariantViolation("rollout: need at least 2 episodes for a CI");
    confidence_z(confidence);
    if (threads == 0) throw SpecInvariantViolation("rollout: threads must be >= 1");
}

namespace {

double max_step_cost(const PomdpModel& model) {
    double rm = 0.0, ro = 0.0, rd = 0.0;
    for (double v : model.reward_maint.a) rm = std::max(rm, std::abs(v));
    for (double v : model.reward_obs.a) ro = std::max(ro, std::abs(v));
    for (double v : model.reward_damage) rd = std::max(rd, std::abs(v));
    return rm + ro + rd;
}

}  // namespace

double truncation_error_bound(const PomdpModel& model, std::size_t horizon) {
    return std::pow(model.discount, static_cast<double>(horizon)) * max_step_cost(model) /
           (1.0 - model.discount);
}

std::size_t default_truncation_horizon(const PomdpModel& model, double resolution) {
    const double m = max_step_cost(model) / (1.0 - model.discount);
    if (m <= resolution) return 1;
    // discount^H * m < resolution
    const double h = std::log(resolution / m) / std::log(model.discount);
    return static_cast<std::size_t>(std::ceil(h)) + 1;
}

// ---------------------------------------------------------------------------
// Rollouts
// ---------------------------------------------------------------------------

namespace {

struct EpisodeOutcome {
    double ret = 0.0;
};

// One full episode; also fills `trace` when non-null.
EpisodeOutcome run_episode(const PomdpModel& model, Policy& policy, const Belief& b0,
                           std::size_t horizon, bool initial_observation, Rng rng,
                           PolicyTrace* trace) {
    const std::size_t S = model.num_states();
    Belief b = b0;
    std::size_t s = rng.categorical(b0.data(), S);

    StepContext ctx{model, b, 0, false, JointObservation{}, 0};
    if (initial_observation) {
        // observe the starting state through the default channel alone
        const std::size_t oe =
            rng.categorical(model.default_obs.row(s), model.num_default_obs());
        std::vector<double> post(S);
        double norm = 0.0;
        for (std::size_t i = 0; i < S; ++i) {
            post[i] = b.p[i] * model.default_obs.at(i, oe);
            norm += post[i];
        }
        if (norm <= kZeroLikelihoodFloor)
            throw ZeroLikelihoodObservation("initial observation has zero likelihood");
        for (std::size_t i = 0; i < S; ++i) post[i] /= norm;
        b.p = std::move(post);
        ctx.has_observation = true;
        ctx.last_obs = JointObservation{oe, 0};
        const int trivial = model.trivial_obs_action();
        ctx.last_a_o = trivial >= 0 ? static_cast<std::size_t>(trivial) : 0;
    }

    double ret = 0.0;
    double weight = 1.0;  // discount^t
    for (std::size_t t = 0; t < horizon; ++t) {
        ctx.t = t;
        const auto [a_m, a_o] = policy.act(ctx);
        if (a_m >= model.num_maint() || a_o >= model.num_obs_actions() ||
            !model.allowed(a_m, a_o))
            throw SpecInvariantViolation("policy chose a disallowed action pair");

        const double step_reward = model.reward_maint.at(s, a_m) + model.reward_damage[s] +
                                   model.discount * model.reward_obs.at(s, a_o);
        if (trace)
            trace->push_back({t, s, b, a_m, a_o, JointObservation{}, step_reward});
        ret += weight * step_reward;
        weight *= model.discount;

        const std::size_t s2 = model.transition[a_m].sample_row(s, rng.uniform());
        const std::size_t oe =
            rng.categorical(model.default_obs.row(s2), model.num_default_obs());
        const std::size_t oa =
            rng.categorical(model.obs_model[a_o].row(s2), model.num_action_obs(a_o));
        const JointObservation obs{oe, oa};
        if (trace) trace->back().obs = obs;

        b = belief_update(model, b, a_m, a_o, obs);
        s = s2;
        ctx.has_observation = true;
        ctx.last_obs = obs;
        ctx.last_a_o = a_o;
    }
    return {ret};
}

}  // namespace

RolloutResult rollout(const PomdpModel& model, Policy& policy, const Belief& b0,
                      const RolloutConfig& config) {
    config.validate();
    const std::size_t horizon =
        config.horizon ? config.horizon : default_truncation_horizon(model);
    const std::size_t n = config.episodes;
    std::vector<double> returns(n, 0.0);

    const auto worker = [&](std::size_t stripe, std::size_t stride) {
        for (std::size_t e = stripe; e < n; e += stride) {
            returns[e] = run_episode(model, policy, b0, horizon,
                                     config.initial_observation,
                                     Rng::split(config.seed, e), nullptr)
                             .ret;
        }
    };
    const std::size_t threads = std::min<std::size_t>(config.threads, n);
    if (threads <= 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t i = 0; i < threads; ++i)
            pool.emplace_back(worker, i, threads);
        for (auto& t : pool) t.join();
    }

    RolloutResult r;
    r.episodes = n;
    r.horizon = horizon;
    r.confidence = config.confidence;
    double sum = 0.0;
    r.min_return = std::numeric_limits<double>::infinity();
    r.max_return = -std::numeric_limits<double>::infinity();
    for (double x : returns) {
        sum += x;
        r.min_return = std::min(r.min_return, x);
        r.max_return = std::max(r.max_return, x);
    }
    r.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double x : returns) ss += (x - r.mean) * (x - r.mean);
    r.std_error = std::sqrt(ss / static_cast<double>(n - 1)) /
                  std::sqrt(static_cast<double>(n));
    r.ci_halfwidth = confidence_z(config.confidence) * r.std_error;
    if (config.keep_returns) r.returns = std::move(returns);
    return r;
}

PolicyTrace trace_realization(const PomdpModel& model, Policy& policy, const Belief& b0,
                              std::uint64_t seed, std::size_t horizon,
                              bool initial_observation) {
    if (horizon == 0) horizon = default_truncation_horizon(model);
    PolicyTrace trace;
    trace.reserve(horizon);
    run_episode(model, policy, b0, horizon, initial_observation, Rng::split(seed, 0),
                &trace);
    return trace;
}

MetricEstimate estimate_metric_by_simulation(const PomdpModel& first_model,
                                             Policy& first_policy,
                                             const PomdpModel& second_model,
                                             Policy& second_policy, const Belief& b0,
                                             const RolloutConfig& config) {
    MetricEstimate m;
    m.first = rollout(first_model, first_policy, b0, config);
    m.second = rollout(second_model, second_policy, b0, config);
    m.difference = m.second.mean - m.first.mean;
    m.ci_halfwidth = confidence_z(config.confidence) *
                     std::sqrt(m.first.std_error * m.first.std_error +
                               m.second.std_error * m.second.std_error);
    return m;
}

}  // namespace voiplan
