#include "voiplan/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include "voiplan/belief.hpp"
#include "voiplan/errors.hpp"
#include "voiplan/kernels.hpp"
#include "voiplan/rng.hpp"

namespace voiplan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Sample one joint observation at a belief: predicted belief is given; the
// joint-observation likelihood vector is formed on the fly.
std::size_t sample_joint_obs(const PomdpModel& model, const double* pred, std::size_t a_o,
                             Rng& rng, std::vector<double>& scratch) {
    const DenseMat& J = model.joint_like(a_o);
    const std::size_t n_obs = J.rows;
    scratch.resize(n_obs);
    const auto& k = kern::active();
    for (std::size_t o = 0; o < n_obs; ++o)
        scratch[o] = k.dot(J.row(o), pred, model.num_states());
    return rng.categorical(scratch.data(), n_obs);
}

// r(b, a_m, a_o) per the decomposed cost convention.
double belief_reward(const PomdpModel& model, const Belief& b, std::size_t a_m,
                     std::size_t a_o) {
    return expected_reward(model, b, a_m, a_o);
}

}  // namespace

std::vector<Belief> collect_beliefs_random_walk(const PomdpModel& model, const Belief& root,
                                                std::size_t count, std::size_t walk_len,
                                                std::uint64_t seed) {
    const std::size_t S = model.num_states();
    const auto pairs = model.allowed_pairs();
    std::vector<Belief> out;
    out.reserve(count);
    out.push_back(root);
    Rng rng = Rng::split(seed, 0xC0111EC7ULL);
    Belief b = root;
    std::size_t steps = 0;
    std::vector<double> pred(S), post(S), scratch;
    while (out.size() < count) {
        const auto [a_m, a_o] = pairs[rng.below(pairs.size())];
        belief_predict_into(model, b, a_m, pred.data());
        const std::size_t o = sample_joint_obs(model, pred.data(), a_o, rng, scratch);
        const double norm = posterior_from_predicted(model, pred.data(), a_o, o, post.data());
        if (norm <= kZeroLikelihoodFloor) {
            b = root;  // dead branch; restart the walk
            steps = 0;
            continue;
        }
        b.p.assign(post.begin(), post.end());
        out.push_back(b);
        if (++steps >= walk_len) {
            b = root;
            steps = 0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Perseus
// ---------------------------------------------------------------------------

ValueBounds perseus_solve(const PomdpModel& model, const SolverConfig& config,
                          const Belief& root) {
    config.validate();
    const auto t0 = Clock::now();
    ValueBounds bounds = initial_bounds(model);
    bounds.upper_point_cap = config.upper_point_cap;

    std::vector<Belief> beliefs = collect_beliefs_random_walk(
        model, root, config.belief_set_size, config.trajectory_length,
        config.exploration_seed);
    const std::size_t n = beliefs.size();
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = bounds.lower_value(beliefs[i]);

    const auto& k = kern::active();
    bool converged = false;
    for (std::size_t sweep = 0; sweep < config.max_iterations; ++sweep) {
        if (seconds_since(t0) > config.max_wall_seconds) break;
        const double root_before = values[0];
        Rng rng = Rng::split(config.exploration_seed, 0x5EEDULL + sweep);
        std::vector<std::size_t> pending(n);
        for (std::size_t i = 0; i < n; ++i) pending[i] = i;

        while (!pending.empty()) {
            const std::size_t pick = rng.below(pending.size());
            const std::size_t idx = pending[pick];
            AlphaVector alpha = backup(model, bounds, beliefs[idx]);
            // add the vector only when it improves some collected belief
            bool improves = false;
            for (std::size_t i = 0; i < n && !improves; ++i)
                improves = k.dot(alpha.v.data(), beliefs[i].data(), alpha.v.size()) >
                           values[i] + 1e-12;
            std::vector<char> improved(n, 0);
            if (improves) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double v =
                        k.dot(alpha.v.data(), beliefs[i].data(), alpha.v.size());
                    if (v > values[i]) {
                        values[i] = v;
                        improved[i] = 1;
                    }
                }
                bounds.lower.push_back(std::move(alpha));
            }
            improved[idx] = 1;  // processed either way
            std::vector<std::size_t> still;
            still.reserve(pending.size());
            for (std::size_t p : pending)
                if (!improved[p]) still.push_back(p);
            pending.swap(still);
        }

        // drop vectors that are the maximizer at no collected belief
        std::vector<char> used(bounds.lower.size(), 0);
        for (std::size_t i = 0; i < n; ++i)
            used[value_of_belief(bounds.lower, beliefs[i]).second] = 1;
        std::vector<AlphaVector> keep;
        keep.reserve(bounds.lower.size());
        for (std::size_t i = 0; i < bounds.lower.size(); ++i)
            if (used[i]) keep.push_back(std::move(bounds.lower[i]));
        bounds.lower.swap(keep);
        for (std::size_t i = 0; i < n; ++i) values[i] = bounds.lower_value(beliefs[i]);

        ConvergenceRecord rec;
        rec.iteration = sweep + 1;
        rec.wall_seconds = seconds_since(t0);
        rec.lower_root = values[0];
        rec.upper_root = bounds.upper_value(root);
        rec.num_alpha = bounds.lower.size();
        rec.num_beliefs = n;
        bounds.log.push_back(rec);

        if (std::abs(values[0] - root_before) < config.epsilon) {
            converged = true;
            break;
        }
    }
    bounds.budget_exhausted = !converged;
    return bounds;
}

// ---------------------------------------------------------------------------
// PBVI
// ---------------------------------------------------------------------------

namespace {

double min_l1_distance(const Belief& b, const std::vector<Belief>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const Belief& x : set) {
        double d = 0.0;
        for (std::size_t s = 0; s < b.dim(); ++s) d += std::abs(b.p[s] - x.p[s]);
        if (d < best) best = d;
    }
    return best;
}

}  // namespace

ValueBounds pbvi_solve(const PomdpModel& model, const SolverConfig& config,
                       const Belief& root) {
    config.validate();
    const auto t0 = Clock::now();
    ValueBounds bounds = initial_bounds(model);
    bounds.upper_point_cap = config.upper_point_cap;

    const std::size_t S = model.num_states();
    const auto pairs = model.allowed_pairs();
    std::vector<Belief> beliefs{root};

    bool converged = false;
    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        if (seconds_since(t0) > config.max_wall_seconds) break;
        const double root_before = bounds.lower_value(root);

        // (a) synchronous backups against a frozen vector set
        std::vector<AlphaVector> fresh;
        fresh.reserve(beliefs.size());
        for (const Belief& b : beliefs) fresh.push_back(backup(model, bounds, b));
        for (auto& a : fresh) bounds.lower.push_back(std::move(a));
        // keep only vectors that support some collected belief
        std::vector<char> used(bounds.lower.size(), 0);
        for (const Belief& b : beliefs) used[value_of_belief(bounds.lower, b).second] = 1;
        std::vector<AlphaVector> keep;
        keep.reserve(bounds.lower.size());
        for (std::size_t i = 0; i < bounds.lower.size(); ++i)
            if (used[i]) keep.push_back(std::move(bounds.lower[i]));
        bounds.lower.swap(keep);

        // (b) expansion: farthest sampled successor per collected belief
        std::size_t added = 0;
        if (beliefs.size() < config.belief_set_size) {
            Rng rng = Rng::split(config.exploration_seed, 0xE09A0DULL + iter);
            std::vector<double> pred(S), post(S), scratch;
            const std::size_t snapshot = beliefs.size();
            for (std::size_t bi = 0; bi < snapshot; ++bi) {
                if (beliefs.size() >= config.belief_set_size) break;
                Belief best_succ;
                double best_dist = -1.0;
                for (const auto& [a_m, a_o] : pairs) {
                    belief_predict_into(model, beliefs[bi], a_m, pred.data());
                    const std::size_t o =
                        sample_joint_obs(model, pred.data(), a_o, rng, scratch);
                    const double norm =
                        posterior_from_predicted(model, pred.data(), a_o, o, post.data());
                    if (norm <= kZeroLikelihoodFloor) continue;
                    Belief cand;
                    cand.p.assign(post.begin(), post.end());
                    const double d = min_l1_distance(cand, beliefs);
                    if (d > best_dist) {
                        best_dist = d;
                        best_succ = std::move(cand);
                    }
                }
                if (best_dist > 1e-9) {
                    beliefs.push_back(std::move(best_succ));
                    ++added;
                }
            }
        }

        const double root_after = bounds.lower_value(root);
        ConvergenceRecord rec;
        rec.iteration = iter + 1;
        rec.wall_seconds = seconds_since(t0);
        rec.lower_root = root_after;
        rec.upper_root = bounds.upper_value(root);
        rec.num_alpha = bounds.lower.size();
        rec.num_beliefs = beliefs.size();
        bounds.log.push_back(rec);

        if (std::abs(root_after - root_before) < config.epsilon && added == 0) {
            converged = true;
            break;
        }
    }
    bounds.budget_exhausted = !converged;
    return bounds;
}

// ---------------------------------------------------------------------------
// Gap-heuristic trial-based solver
// ---------------------------------------------------------------------------

namespace {

struct GapContext {
    const PomdpModel* model;
    ValueBounds* bounds;
    const SolverConfig* config;
    std::vector<std::size_t> alpha_last_touch;  // per lower vector, trial number
    std::size_t trial = 0;
    // last greedy pair per visited belief (by content hash): evaluating it
    // first makes the corner-bound early break bite almost immediately on
    // revisited nodes
    std::unordered_map<std::uint64_t, std::pair<std::size_t, std::size_t>> pair_hint;

    double lower_touch(const Belief& b) { return lower_touch_raw(b.data(), b.dim()); }

    double lower_touch_raw(const double* p, std::size_t n) {
        const auto& k = kern::active();
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t i = 0; i < bounds->lower.size(); ++i) {
            const double d = k.dot(p, bounds->lower[i].v.data(), n);
            if (d > best) {
                best = d;
                arg = i;
            }
        }
        alpha_last_touch[arg] = trial;
        return best;
    }
};

std::uint64_t belief_content_hash(const double* p, std::size_t n) {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL ^ n;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &p[i], sizeof bits);
        h ^= bits + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

// Upper-bound greedy action with corner-bound branch&bound: the corner-only
// Q value never underestimates the sawtooth Q value, so pairs are evaluated
// in descending corner order and evaluation stops once no remaining pair can
// beat the best full value.
struct ActionChoice {
    std::size_t a_m = 0, a_o = 0;
    double q_upper = -std::numeric_limits<double>::infinity();
};

ActionChoice select_action_upper(GapContext& ctx, const Belief& b,
                                 std::vector<std::vector<double>>& preds) {
    const PomdpModel& model = *ctx.model;
    const auto& k = kern::active();
    const std::size_t S = model.num_states();
    const double gamma = model.discount;

    preds.assign(model.num_maint(), {});
    struct Scored {
        double q_corner;
        std::size_t a_m, a_o;
    };
    std::vector<Scored> order;
    for (std::size_t a_m = 0; a_m < model.num_maint(); ++a_m) {
        bool any = false;
        for (std::size_t a_o = 0; a_o < model.num_obs_actions(); ++a_o)
            any = any || model.allowed(a_m, a_o);
        if (!any) continue;
        preds[a_m].resize(S);
        belief_predict_into(model, b, a_m, preds[a_m].data());
        const double future_corner =
            gamma * k.dot(preds[a_m].data(), ctx.bounds->upper_corners.data(), S);
        for (std::size_t a_o = 0; a_o < model.num_obs_actions(); ++a_o) {
            if (!model.allowed(a_m, a_o)) continue;
            order.push_back(
                {belief_reward(model, b, a_m, a_o) + future_corner, a_m, a_o});
        }
    }
    std::stable_sort(order.begin(), order.end(), [](const Scored& x, const Scored& y) {
        if (x.q_corner != y.q_corner) return x.q_corner > y.q_corner;
        if (x.a_m != y.a_m) return x.a_m < y.a_m;
        return x.a_o < y.a_o;
    });

    ActionChoice best;
    std::vector<double> post(S);
    auto eval_pair = [&](std::size_t a_m, std::size_t a_o) {
        const DenseMat& J = model.joint_like(a_o);
        const std::size_t n_obs = model.num_joint_obs(a_o);
        double future = 0.0;
        for (std::size_t o = 0; o < n_obs; ++o) {
            const double norm = k.dot(J.row(o), preds[a_m].data(), S);
            if (norm <= kZeroLikelihoodFloor) continue;
            k.hadamard(J.row(o), preds[a_m].data(), post.data(), S);
            k.scale(post.data(), 1.0 / norm, S);
            future += norm * sawtooth_value(*ctx.bounds, post.data(), S);
        }
        const double q = belief_reward(model, b, a_m, a_o) + gamma * future;
        if (q > best.q_upper) {
            best.q_upper = q;
            best.a_m = a_m;
            best.a_o = a_o;
        }
    };

    // seed the early break with the last greedy pair seen at this belief
    const std::uint64_t bh = belief_content_hash(b.data(), b.dim());
    const auto hint = ctx.pair_hint.find(bh);
    bool hinted = false;
    std::size_t hint_am = 0, hint_ao = 0;
    if (hint != ctx.pair_hint.end() && !preds[hint->second.first].empty() &&
        model.allowed(hint->second.first, hint->second.second)) {
        hint_am = hint->second.first;
        hint_ao = hint->second.second;
        hinted = true;
        eval_pair(hint_am, hint_ao);
    }
    for (const Scored& sc : order) {
        if (sc.q_corner <= best.q_upper + 1e-12) break;
        if (hinted && sc.a_m == hint_am && sc.a_o == hint_ao) continue;
        eval_pair(sc.a_m, sc.a_o);
    }
    ctx.pair_hint[bh] = {best.a_m, best.a_o};
    return best;
}

void gap_trial(GapContext& ctx, const Belief& b, std::size_t depth, double eps_scaled) {
    const PomdpModel& model = *ctx.model;
    const auto& k = kern::active();
    const std::size_t S = model.num_states();
    const double gamma = model.discount;

    const double width = sawtooth_value(*ctx.bounds, b) - ctx.lower_touch(b);
    if (width <= eps_scaled || depth >= ctx.config->trajectory_length) return;

    std::vector<std::vector<double>> preds;
    ActionChoice act = select_action_upper(ctx, b, preds);
    add_upper_point(*ctx.bounds, b, act.q_upper);

    // observation choice: likelihood-weighted excess gap of the successor
    const DenseMat& J = model.joint_like(act.a_o);
    const std::size_t n_obs = model.num_joint_obs(act.a_o);
    const double child_eps = eps_scaled / gamma;
    double best_score = 0.0;
    std::vector<double> best_post;
    std::vector<double> post(S);
    for (std::size_t o = 0; o < n_obs; ++o) {
        const double norm = k.dot(J.row(o), preds[act.a_m].data(), S);
        if (norm <= kZeroLikelihoodFloor) continue;
        k.hadamard(J.row(o), preds[act.a_m].data(), post.data(), S);
        k.scale(post.data(), 1.0 / norm, S);
        const double child_width = sawtooth_value(*ctx.bounds, post.data(), S) -
                                   ctx.lower_touch_raw(post.data(), S);
        const double score = norm * (child_width - child_eps);
        if (score > best_score) {
            best_score = score;
            best_post = post;
        }
    }
    if (best_score > 0.0) {
        Belief child;
        child.p = std::move(best_post);
        gap_trial(ctx, child, depth + 1, child_eps);
    }

    // unwind: tighten both bounds at b
    AlphaVector alpha = backup(model, *ctx.bounds, b);
    const double at_b = k.dot(alpha.v.data(), b.data(), S);
    if (at_b > ctx.lower_touch(b) + ctx.config->pruning_tolerance) {
        ctx.bounds->lower.push_back(std::move(alpha));
        ctx.alpha_last_touch.push_back(ctx.trial);
    }
    std::vector<std::vector<double>> preds2;
    const ActionChoice act2 = select_action_upper(ctx, b, preds2);
    add_upper_point(*ctx.bounds, b, act2.q_upper);
}

}  // namespace

ValueBounds gap_heuristic_solve(const PomdpModel& model, const SolverConfig& config,
                                const Belief& root) {
    config.validate();
    const auto t0 = Clock::now();
    ValueBounds bounds = initial_bounds(model);
    bounds.upper_point_cap = config.upper_point_cap;

    GapContext ctx;
    ctx.model = &model;
    ctx.bounds = &bounds;
    ctx.config = &config;
    ctx.alpha_last_touch.assign(bounds.lower.size(), 0);

    // Both bound representations grow by roughly one element per visited
    // node, so trials slow down quadratically without frequent pruning.
    constexpr std::size_t kPruneEvery = 8;   // trials between prune passes
    constexpr std::size_t kTouchWindow = 16;  // trials a vector may go unused
    bool converged = false;
    for (std::size_t trial = 0; trial < config.max_iterations; ++trial) {
        if (seconds_since(t0) > config.max_wall_seconds) break;
        ctx.trial = trial;
        gap_trial(ctx, root, 0, config.epsilon);

        const double lower_root = bounds.lower_value(root);
        const double upper_root = bounds.upper_value(root);
        ConvergenceRecord rec;
        rec.iteration = trial + 1;
        rec.wall_seconds = seconds_since(t0);
        rec.lower_root = lower_root;
        rec.upper_root = upper_root;
        rec.num_alpha = bounds.lower.size();
        rec.num_beliefs = bounds.upper_points.size();
        bounds.log.push_back(rec);

        if (upper_root - lower_root <= config.epsilon) {
            converged = true;
            break;
        }

        // periodic pruning: drop vectors that supported no visited belief
        // during the recent window, and upper points that no longer tighten
        // the sawtooth by more than a sliver of the gap target
        if ((trial + 1) % kPruneEvery == 0) {
            if (bounds.lower.size() > 1) {
                const std::size_t cutoff = trial >= kTouchWindow ? trial - kTouchWindow + 1 : 0;
                // the root's supporting vector must survive
                ctx.lower_touch(root);
                std::vector<AlphaVector> keep;
                std::vector<std::size_t> touch;
                keep.reserve(bounds.lower.size());
                for (std::size_t i = 0; i < bounds.lower.size(); ++i) {
                    if (ctx.alpha_last_touch[i] >= cutoff) {
                        keep.push_back(std::move(bounds.lower[i]));
                        touch.push_back(ctx.alpha_last_touch[i]);
                    }
                }
                if (!keep.empty()) {
                    bounds.lower.swap(keep);
                    ctx.alpha_last_touch.swap(touch);
                }
            }
            // Tolerance proportional to the open gap: while the bound is
            // loose, near-redundant points add nothing but quadratic cost.
            prune_upper_points(bounds,
                               std::max(1e-9, 1e-3 * (upper_root - lower_root)));
        }
    }
    bounds.budget_exhausted = !converged;
    return bounds;
}

const char* solver_kind_name(SolverKind kind) {
    switch (kind) {
        case SolverKind::perseus: return "perseus";
        case SolverKind::pbvi: return "pbvi";
        case SolverKind::gap: return "gap";
    }
    return "unknown";
}

SolverKind parse_solver_kind(const std::string& name) {
    if (name == "perseus") return SolverKind::perseus;
    if (name == "pbvi") return SolverKind::pbvi;
    if (name == "gap") return SolverKind::gap;
    throw ParseError("unknown solver '" + name + "' (expected perseus, pbvi, or gap)");
}

ValueBounds solve_with(SolverKind kind, const PomdpModel& model, const SolverConfig& config,
                       const Belief& root) {
    switch (kind) {
        case SolverKind::perseus: return perseus_solve(model, config, root);
        case SolverKind::pbvi: return pbvi_solve(model, config, root);
        case SolverKind::gap: break;
    }
    return gap_heuristic_solve(model, config, root);
}

}  // namespace voiplan
