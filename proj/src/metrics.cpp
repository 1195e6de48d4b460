#include "voiplan/metrics.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "voiplan/belief.hpp"
#include "voiplan/errors.hpp"
#include "voiplan/kernels.hpp"

namespace voiplan {

namespace {

void fnv_mix(std::uint64_t& h, const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 0x100000001b3ULL;
    }
}

bool mats_equal(const DenseMat& x, const DenseMat& y, double tol) {
    if (x.rows != y.rows || x.cols != y.cols) return false;
    for (std::size_t i = 0; i < x.a.size(); ++i)
        if (std::abs(x.a[i] - y.a[i]) > tol) return false;
    return true;
}

bool trans_equal(const TransMat& x, const TransMat& y, double tol) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c)
            if (std::abs(x.at(r, c) - y.at(r, c)) > tol) return false;
    return true;
}

ValueReport report_of(const std::string& label, const Belief& b, const ValueBounds& bounds,
                      std::uint64_t digest) {
    ValueReport r;
    r.label = label;
    r.root = b;
    r.value = bounds.lower_value(b);
    const double up = bounds.upper_value(b);
    r.gap = up > r.value ? up - r.value : 0.0;
    r.config_digest = digest;
    return r;
}

}  // namespace

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::original: return "original";
        case Provenance::default_derived: return "default";
        case Provenance::perm_derived: return "perm";
        case Provenance::mdp_derived: return "mdp";
        case Provenance::explicit_setting: return "explicit";
    }
    return "unknown";
}

std::uint64_t solver_config_digest(const SolverConfig& config, SolverKind kind) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    fnv_mix(h, &config.epsilon, sizeof config.epsilon);
    fnv_mix(h, &config.max_iterations, sizeof config.max_iterations);
    fnv_mix(h, &config.max_wall_seconds, sizeof config.max_wall_seconds);
    fnv_mix(h, &config.belief_set_size, sizeof config.belief_set_size);
    fnv_mix(h, &config.trajectory_length, sizeof config.trajectory_length);
    fnv_mix(h, &config.exploration_seed, sizeof config.exploration_seed);
    fnv_mix(h, &config.pruning_tolerance, sizeof config.pruning_tolerance);
    fnv_mix(h, &config.upper_point_cap, sizeof config.upper_point_cap);
    const int k = static_cast<int>(kind);
    fnv_mix(h, &k, sizeof k);
    return h;
}

bool maintenance_elements_match(const PomdpModel& a, const PomdpModel& b, double tol) {
    if (a.num_states() != b.num_states()) return false;
    if (a.num_maint() != b.num_maint()) return false;
    if (std::abs(a.discount - b.discount) > tol) return false;
    for (std::size_t m = 0; m < a.num_maint(); ++m)
        if (!trans_equal(a.transition[m], b.transition[m], tol)) return false;
    if (!mats_equal(a.reward_maint, b.reward_maint, tol)) return false;
    if (a.reward_damage.size() != b.reward_damage.size()) return false;
    for (std::size_t s = 0; s < a.reward_damage.size(); ++s)
        if (std::abs(a.reward_damage[s] - b.reward_damage[s]) > tol) return false;
    if (!mats_equal(a.default_obs, b.default_obs, tol)) return false;
    return true;
}

ControlSetting make_default(const PomdpModel& model) {
    ControlSetting out;
    out.label = "default";
    out.provenance = Provenance::default_derived;
    if (model.num_obs_actions() == 1 && model.is_trivial_obs_action(0) &&
        model.allowed_mask.empty()) {
        out.model = model;
        out.model.finalize();
        return out;
    }
    const std::size_t S = model.num_states();
    PomdpModel m = model;
    m.obs_action_names = {"none"};
    m.obs_model = {DenseMat(S, 1, 1.0)};
    m.reward_obs = DenseMat(S, 1, 0.0);
    m.allowed_mask.clear();
    m.finalize();
    m.validate();
    out.model = std::move(m);
    return out;
}

ControlSetting make_perm(const PomdpModel& model, std::size_t a_o) {
    if (a_o >= model.num_obs_actions())
        throw SpecInvariantViolation("make_perm: observation action index out of range");
    if (model.is_trivial_obs_action(a_o))
        throw TrivialActionSelected(
            "make_perm: chosen observation action is trivial (unit observation set, "
            "zero cost); a permanent-monitoring setting needs an informative channel");
    const std::size_t S = model.num_states();
    PomdpModel m = model;
    m.obs_action_names = {model.obs_action_names[a_o]};
    m.obs_model = {model.obs_model[a_o]};
    m.reward_obs = DenseMat(S, 1, 0.0);
    m.allowed_mask.clear();
    m.finalize();
    m.validate();
    ControlSetting out;
    out.label = "perm(" + model.obs_action_names[a_o] + ")";
    out.provenance = Provenance::perm_derived;
    out.model = std::move(m);
    return out;
}

ControlSetting make_mdp(const PomdpModel& model) {
    const std::size_t S = model.num_states();
    PomdpModel m = model;
    m.obs_action_names = {"reveal"};
    DenseMat eye(S, S, 0.0);
    for (std::size_t s = 0; s < S; ++s) eye.at(s, s) = 1.0;
    m.obs_model = {std::move(eye)};
    m.reward_obs = DenseMat(S, 1, 0.0);
    m.allowed_mask.clear();
    m.finalize();
    m.validate();
    ControlSetting out;
    out.label = "mdp";
    out.provenance = Provenance::mdp_derived;
    out.model = std::move(m);
    return out;
}

double default_channel_expectation(const PomdpModel& model,
                                   const std::vector<AlphaVector>& values, const Belief& b,
                                   std::size_t a_m) {
    const auto& k = kern::active();
    const std::size_t S = model.num_states();
    std::vector<double> pred(S), col(S), post(S);
    belief_predict_into(model, b, a_m, pred.data());
    double acc = 0.0;
    for (std::size_t oe = 0; oe < model.num_default_obs(); ++oe) {
        for (std::size_t s = 0; s < S; ++s) col[s] = model.default_obs.at(s, oe);
        const double norm = k.dot(col.data(), pred.data(), S);
        if (norm <= kZeroLikelihoodFloor) continue;
        k.hadamard(col.data(), pred.data(), post.data(), S);
        k.scale(post.data(), 1.0 / norm, S);
        Belief nb;
        nb.p.assign(post.begin(), post.end());
        acc += norm * value_of_belief(values, nb).first;
    }
    return acc;
}

namespace {

// Expected post-update value over the joint observation set of (a_m, a_o).
double joint_expectation(const PomdpModel& model, const std::vector<AlphaVector>& values,
                         const double* pred, std::size_t a_o) {
    const auto& k = kern::active();
    const std::size_t S = model.num_states();
    const DenseMat& J = model.joint_like(a_o);
    std::vector<double> post(S);
    double acc = 0.0;
    for (std::size_t o = 0; o < model.num_joint_obs(a_o); ++o) {
        const double norm = k.dot(J.row(o), pred, S);
        if (norm <= kZeroLikelihoodFloor) continue;
        k.hadamard(J.row(o), pred, post.data(), S);
        k.scale(post.data(), 1.0 / norm, S);
        Belief nb;
        nb.p.assign(post.begin(), post.end());
        acc += norm * value_of_belief(values, nb).first;
    }
    return acc;
}

}  // namespace

double step_voi(const PomdpModel& model, const ValueBounds& bounds, const Belief& b,
                std::size_t a_m, std::size_t a_o) {
    const std::size_t S = model.num_states();
    std::vector<double> pred(S);
    belief_predict_into(model, b, a_m, pred.data());
    const double with_channel = joint_expectation(model, bounds.lower, pred.data(), a_o);
    const double without = default_channel_expectation(model, bounds.lower, b, a_m);
    return with_channel - without;
}

double step_vopi(const PomdpModel& model, const ValueBounds& bounds, const Belief& b,
                 std::size_t a_m) {
    const std::size_t S = model.num_states();
    std::vector<double> pred(S);
    belief_predict_into(model, b, a_m, pred.data());
    // corner values of the lower value function: g(s) = max_i alpha_i(s)
    std::vector<double> g(S, -std::numeric_limits<double>::infinity());
    for (const AlphaVector& a : bounds.lower)
        for (std::size_t s = 0; s < S; ++s) g[s] = std::max(g[s], a.v[s]);
    double revealed = 0.0;
    for (std::size_t s = 0; s < S; ++s)
        if (pred[s] > 0.0) revealed += pred[s] * g[s];
    const double without = default_channel_expectation(model, bounds.lower, b, a_m);
    return revealed - without;
}

double net_step_voi(const PomdpModel& model, const ValueBounds& bounds, const Belief& b,
                    std::size_t a_m, std::size_t a_o) {
    const auto& k = kern::active();
    const std::size_t S = model.num_states();
    std::vector<double> col(S);
    for (std::size_t s = 0; s < S; ++s) col[s] = model.reward_obs.at(s, a_o);
    const double obs_cost = k.dot(b.data(), col.data(), S);
    return step_voi(model, bounds, b, a_m, a_o) - std::abs(obs_cost);
}

double bellman_direct(const PomdpModel& model, const ValueBounds& bounds, const Belief& b) {
    const std::size_t S = model.num_states();
    std::vector<double> pred(S);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a_m = 0; a_m < model.num_maint(); ++a_m) {
        bool predicted = false;
        for (std::size_t a_o = 0; a_o < model.num_obs_actions(); ++a_o) {
            if (!model.allowed(a_m, a_o)) continue;
            if (!predicted) {
                belief_predict_into(model, b, a_m, pred.data());
                predicted = true;
            }
            const double q =
                expected_reward(model, b, a_m, a_o) +
                model.discount * joint_expectation(model, bounds.lower, pred.data(), a_o);
            if (q > best) best = q;
        }
    }
    if (!std::isfinite(best))
        throw SpecInvariantViolation("bellman_direct: no allowed action pair");
    return best;
}

double bellman_via_netvoi(const PomdpModel& model, const ValueBounds& bounds,
                          const Belief& b) {
    const auto& k = kern::active();
    const std::size_t S = model.num_states();
    std::vector<double> mcol(S);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a_m = 0; a_m < model.num_maint(); ++a_m) {
        bool any = false;
        for (std::size_t a_o = 0; a_o < model.num_obs_actions(); ++a_o)
            any = any || model.allowed(a_m, a_o);
        if (!any) continue;
        for (std::size_t s = 0; s < S; ++s)
            mcol[s] = model.reward_maint.at(s, a_m) + model.reward_damage[s];
        const double base = k.dot(b.data(), mcol.data(), S);
        const double e_def = default_channel_expectation(model, bounds.lower, b, a_m);
        double best_net = -std::numeric_limits<double>::infinity();
        for (std::size_t a_o = 0; a_o < model.num_obs_actions(); ++a_o) {
            if (!model.allowed(a_m, a_o)) continue;
            const double n = net_step_voi(model, bounds, b, a_m, a_o);
            if (n > best_net) best_net = n;
        }
        const double cand = base + model.discount * (e_def + best_net);
        if (cand > best) best = cand;
    }
    if (!std::isfinite(best))
        throw SpecInvariantViolation("bellman_via_netvoi: no allowed action pair");
    return best;
}

GainResult life_cycle_gain(const ControlSetting& first, const ControlSetting& second,
                           const Belief& b, const SolverConfig& config, SolverKind kind) {
    if (!maintenance_elements_match(first.model, second.model))
        throw IncompatibleSettings(
            "life_cycle_gain: settings '" + first.label + "' and '" + second.label +
            "' differ in a maintenance-side element (states, discount, transitions, "
            "maintenance/damage rewards, or default channel)");
    const std::uint64_t digest = solver_config_digest(config, kind);
    const ValueBounds b1 = solve_with(kind, first.model, config, b);
    const ValueBounds b2 = solve_with(kind, second.model, config, b);
    GainResult g;
    g.first = report_of(first.label, b, b1, digest);
    g.second = report_of(second.label, b, b2, digest);
    g.gain = g.second.value - g.first.value;
    g.uncertainty = g.first.gap + g.second.gap;
    return g;
}

GainResult voi(const PomdpModel& model, const Belief& b, const SolverConfig& config,
               SolverKind kind) {
    ControlSetting original;
    original.label = "original";
    original.provenance = Provenance::original;
    original.model = model;
    original.model.finalize();
    return life_cycle_gain(make_default(model), original, b, config, kind);
}

GainResult vopi(const PomdpModel& model, const Belief& b, const SolverConfig& config,
                SolverKind kind) {
    const ControlSetting def = make_default(model);
    const std::uint64_t digest = solver_config_digest(config, kind);
    const ValueBounds bd = solve_with(kind, def.model, config, b);
    GainResult g;
    g.first = report_of(def.label, b, bd, digest);
    g.second.label = "mdp";
    g.second.root = b;
    g.second.value = mdp_value_at_belief(model, mdp_value_iteration(model), b);
    g.second.gap = 0.0;
    g.second.config_digest = digest;
    g.gain = g.second.value - g.first.value;
    g.uncertainty = g.first.gap;
    return g;
}

GainResult voshm(const ControlSetting& optional_setting, const ControlSetting& perm_setting,
                 const Belief& b, const SolverConfig& config, SolverKind kind) {
    return life_cycle_gain(optional_setting, perm_setting, b, config, kind);
}

GainResult rvoci(const PomdpModel& model, std::size_t a_o, const Belief& b,
                 const SolverConfig& config, SolverKind kind) {
    ControlSetting original;
    original.label = "original";
    original.provenance = Provenance::original;
    original.model = model;
    original.model.finalize();
    return life_cycle_gain(original, make_perm(model, a_o), b, config, kind);
}

}  // namespace voiplan
