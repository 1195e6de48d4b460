#include "voiplan/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "voiplan/belief.hpp"
#include "voiplan/kernels.hpp"

namespace voiplan {

namespace {

// FNV-1a over the exact byte representation; used only to find duplicate
// beliefs quickly (byte equality is re-verified on hit).
std::uint64_t belief_bytes_hash(const Belief& b) {
    std::uint64_t h = 1469598103934665603ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(b.p.data());
    const std::size_t n = b.p.size() * sizeof(double);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
    }
    return h;
}

bool belief_bytes_equal(const Belief& x, const Belief& y) {
    return x.p.size() == y.p.size() &&
           std::memcmp(x.p.data(), y.p.data(), x.p.size() * sizeof(double)) == 0;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(epsilon > 0.0)) throw SpecInvariantViolation("solver epsilon must be > 0");
    if (max_iterations < 1) throw SpecInvariantViolation("max_iterations must be >= 1");
    if (belief_set_size < 1) throw SpecInvariantViolation("belief_set_size must be >= 1");
    if (trajectory_length < 1) throw SpecInvariantViolation("trajectory_length must be >= 1");
    if (upper_point_cap < 1) throw SpecInvariantViolation("upper_point_cap must be >= 1");
}

double ValueBounds::lower_value(const Belief& b) const {
    return value_of_belief(lower, b).first;
}

std::pair<double, std::size_t> ValueBounds::lower_value_argmax(const Belief& b) const {
    return value_of_belief(lower, b);
}

double ValueBounds::upper_value(const Belief& b) const { return sawtooth_value(*this, b); }

void ValueBounds::rebuild_upper_cache() {
    const auto& k = kern::active();
    point_excess.resize(upper_points.size());
    point_index.clear();
    for (std::size_t i = 0; i < upper_points.size(); ++i) {
        const UpperPoint& pt = upper_points[i];
        point_excess[i] = pt.v - k.dot(pt.b.data(), upper_corners.data(), pt.b.dim());
        point_index.emplace(belief_bytes_hash(pt.b), i);
    }
}

double sawtooth_value(const ValueBounds& bounds, const double* p, std::size_t n) {
    const auto& k = kern::active();
    const double corner = k.dot(p, bounds.upper_corners.data(), n);
    double best = 0.0;
    for (std::size_t i = 0; i < bounds.upper_points.size(); ++i) {
        const double excess = bounds.point_excess[i];
        if (excess >= 0.0) continue;  // point does not improve the corner bound
        const double ratio = k.min_ratio(p, bounds.upper_points[i].b.data(), n);
        const double improve = excess * ratio;
        if (improve < best) best = improve;
    }
    return corner + best;
}

double sawtooth_value(const ValueBounds& bounds, const Belief& b) {
    return sawtooth_value(bounds, b.data(), b.dim());
}

void add_upper_point(ValueBounds& bounds, const Belief& b, double v) {
    const auto& k = kern::active();
    const double current = sawtooth_value(bounds, b);
    if (v > current) v = current;  // keep the tightest value known at b

    const std::uint64_t h = belief_bytes_hash(b);
    auto it = bounds.point_index.find(h);
    if (it != bounds.point_index.end() &&
        belief_bytes_equal(bounds.upper_points[it->second].b, b)) {
        UpperPoint& pt = bounds.upper_points[it->second];
        if (v < pt.v) {
            pt.v = v;
            bounds.point_excess[it->second] =
                v - k.dot(pt.b.data(), bounds.upper_corners.data(), pt.b.dim());
        }
        return;
    }

    // A point that does not tighten the interpolation is not worth storing.
    if (v >= current - 1e-12) return;

    UpperPoint pt;
    pt.b = b;
    pt.v = v;
    bounds.upper_points.push_back(std::move(pt));
    bounds.point_excess.push_back(
        v - k.dot(b.data(), bounds.upper_corners.data(), b.dim()));
    bounds.point_index.emplace(h, bounds.upper_points.size() - 1);

    if (bounds.upper_points.size() <= bounds.upper_point_cap) return;

    // Over capacity: drop points dominated by the rest, then fall back to
    // dropping the oldest overflow.
    prune_upper_points(bounds, 1e-9);
    const std::size_t keep_target = std::max<std::size_t>(1, bounds.upper_point_cap * 3 / 4);
    if (bounds.upper_points.size() > keep_target) {
        const std::size_t drop = bounds.upper_points.size() - keep_target;
        bounds.upper_points.erase(bounds.upper_points.begin(),
                                  bounds.upper_points.begin() +
                                      static_cast<std::ptrdiff_t>(drop));
        bounds.rebuild_upper_cache();
    }
}

void prune_upper_points(ValueBounds& bounds, double tol) {
    if (bounds.upper_points.empty()) return;
    const auto& k = kern::active();
    std::vector<UpperPoint> old;
    old.swap(bounds.upper_points);
    bounds.point_excess.clear();
    bounds.point_index.clear();
    // newest first: late points carry the tightest values seen at their
    // beliefs, so they should suppress stale earlier ones, not the reverse
    for (std::size_t i = old.size(); i-- > 0;) {
        UpperPoint& cand = old[i];
        const double sv = sawtooth_value(bounds, cand.b);
        if (cand.v >= sv - tol) continue;  // tightens at most tol: drop
        bounds.upper_points.push_back(std::move(cand));
        const UpperPoint& pt = bounds.upper_points.back();
        bounds.point_excess.push_back(
            pt.v - k.dot(pt.b.data(), bounds.upper_corners.data(), pt.b.dim()));
        bounds.point_index.emplace(belief_bytes_hash(pt.b), bounds.upper_points.size() - 1);
    }
}

AlphaVector backup(const PomdpModel& model, const ValueBounds& bounds, const Belief& b) {
    if (bounds.lower.empty()) throw EmptyAlphaSet("backup with an empty lower bound set");
    const auto& k = kern::active();
    const std::size_t S = model.num_states();
    const double gamma = model.discount;

    std::vector<double> pred(S), post(S), acc(S), tmp(S), cand(S);
    AlphaVector best;
    double best_val = -std::numeric_limits<double>::infinity();

    for (std::size_t a_m = 0; a_m < model.num_maint(); ++a_m) {
        bool any = false;
        for (std::size_t a_o = 0; a_o < model.num_obs_actions() && !any; ++a_o)
            any = model.allowed(a_m, a_o);
        if (!any) continue;
        belief_predict_into(model, b, a_m, pred.data());

        for (std::size_t a_o = 0; a_o < model.num_obs_actions(); ++a_o) {
            if (!model.allowed(a_m, a_o)) continue;
            const DenseMat& J = model.joint_like(a_o);
            std::fill(acc.begin(), acc.end(), 0.0);
            const std::size_t n_obs = model.num_joint_obs(a_o);
            for (std::size_t o = 0; o < n_obs; ++o) {
                const double* like_row = J.row(o);
                const double norm = k.dot(like_row, pred.data(), S);
                std::size_t pick = 0;
                if (norm > kZeroLikelihoodFloor) {
                    // argmax over the (unnormalized) posterior: positive
                    // scaling does not change the maximizer
                    k.hadamard(like_row, pred.data(), post.data(), S);
                    double best_dot = -std::numeric_limits<double>::infinity();
                    for (std::size_t i = 0; i < bounds.lower.size(); ++i) {
                        const double d = k.dot(post.data(), bounds.lower[i].v.data(), S);
                        if (d > best_dot) {
                            best_dot = d;
                            pick = i;
                        }
                    }
                }
                k.hadamard_acc(like_row, bounds.lower[pick].v.data(), acc.data(), S);
            }
            model.transition[a_m].apply(acc.data(), tmp.data());
            for (std::size_t s = 0; s < S; ++s)
                cand[s] = model.reward_maint.at(s, a_m) +
                          gamma * model.reward_obs.at(s, a_o) + model.reward_damage[s] +
                          gamma * tmp[s];
            const double val = k.dot(b.data(), cand.data(), S);
            if (val > best_val) {
                best_val = val;
                best.v = cand;
                best.a_m = static_cast<int>(a_m);
                best.a_o = static_cast<int>(a_o);
            }
        }
    }
    return best;
}

std::vector<AlphaVector> blind_lower_bound(const PomdpModel& model) {
    const std::size_t S = model.num_states();
    const double gamma = model.discount;
    std::vector<AlphaVector> out;
    out.reserve(model.num_maint());
    std::vector<double> reward(S), next(S);
    for (std::size_t a_m = 0; a_m < model.num_maint(); ++a_m) {
        const std::size_t a_o = model.cheapest_obs_action_for(a_m);
        double r_min = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            reward[s] = model.reward_maint.at(s, a_m) +
                        gamma * model.reward_obs.at(s, a_o) + model.reward_damage[s];
            r_min = std::min(r_min, reward[s]);
        }
        AlphaVector alpha;
        alpha.a_m = static_cast<int>(a_m);
        alpha.a_o = static_cast<int>(a_o);
        // start below the fixed point so truncated iteration stays a valid
        // lower bound (iterates increase monotonically)
        alpha.v.assign(S, r_min / (1.0 - gamma));
        const std::size_t max_iters = 200000;
        for (std::size_t it = 0; it < max_iters; ++it) {
            model.transition[a_m].apply(alpha.v.data(), next.data());
            double delta = 0.0;
            for (std::size_t s = 0; s < S; ++s) {
                const double nv = reward[s] + gamma * next[s];
                delta = std::max(delta, std::abs(nv - alpha.v[s]));
                alpha.v[s] = nv;
            }
            if (delta <= 1e-9) break;
        }
        out.push_back(std::move(alpha));
    }
    return out;
}

std::vector<double> mdp_value_iteration(const PomdpModel& model) {
    const std::size_t S = model.num_states();
    const double gamma = model.discount;
    std::vector<double> v(S, 0.0), pv(S), nv(S);
    const std::size_t max_iters = 1000000;
    for (std::size_t it = 0; it < max_iters; ++it) {
        std::fill(nv.begin(), nv.end(), -std::numeric_limits<double>::infinity());
        for (std::size_t a = 0; a < model.num_maint(); ++a) {
            model.transition[a].apply(v.data(), pv.data());
            for (std::size_t s = 0; s < S; ++s) {
                const double q =
                    model.reward_maint.at(s, a) + model.reward_damage[s] + gamma * pv[s];
                if (q > nv[s]) nv[s] = q;
            }
        }
        double delta = 0.0, scale = 1.0;
        for (std::size_t s = 0; s < S; ++s) {
            delta = std::max(delta, std::abs(nv[s] - v[s]));
            scale = std::max(scale, std::abs(nv[s]));
        }
        v.swap(nv);
        if (delta <= 1e-13 * scale) break;
    }
    return v;
}

std::vector<double> mdp_finite_horizon(const PomdpModel& model, std::size_t horizon) {
    const std::size_t S = model.num_states();
    const double gamma = model.discount;
    std::vector<double> v(S, 0.0), pv(S), nv(S);
    for (std::size_t t = 0; t < horizon; ++t) {
        std::fill(nv.begin(), nv.end(), -std::numeric_limits<double>::infinity());
        for (std::size_t a = 0; a < model.num_maint(); ++a) {
            model.transition[a].apply(v.data(), pv.data());
            for (std::size_t s = 0; s < S; ++s) {
                const double q =
                    model.reward_maint.at(s, a) + model.reward_damage[s] + gamma * pv[s];
                if (q > nv[s]) nv[s] = q;
            }
        }
        v.swap(nv);
    }
    return v;
}

double mdp_value_at_belief(const PomdpModel& model, const std::vector<double>& v_mdp,
                           const Belief& b) {
    const auto& k = kern::active();
    const std::size_t S = model.num_states();
    std::vector<double> pred(S);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < model.num_maint(); ++a) {
        double r = k.dot(b.data(), model.reward_damage.data(), S);
        for (std::size_t s = 0; s < S; ++s) r += b.p[s] * model.reward_maint.at(s, a);
        belief_predict_into(model, b, a, pred.data());
        const double q = r + model.discount * k.dot(pred.data(), v_mdp.data(), S);
        if (q > best) best = q;
    }
    return best;
}

ValueBounds initial_bounds(const PomdpModel& model) {
    ValueBounds bounds;
    bounds.lower = blind_lower_bound(model);
    bounds.upper_corners = mdp_value_iteration(model);
    bounds.rebuild_upper_cache();
    return bounds;
}

}  // namespace voiplan
