#include "voiplan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "voiplan/belief.hpp"
#include "voiplan/kernels.hpp"
#include "voiplan/simplex.hpp"

namespace voiplan {

namespace {

// Witness LP: find a belief where `alpha` beats every vector in `kept` by
// the largest margin. Variables: b (S), delta+ and delta- (free objective
// split), one slack per kept vector.
//   b.(alpha - u) - d+ + d- - w_u = 0   for all u in kept
//   sum b = 1
// maximize d+ - d-.
struct Witness {
    bool found = false;
    double margin = -std::numeric_limits<double>::infinity();
    std::vector<double> belief;
};

Witness find_witness(const std::vector<double>& alpha,
                     const std::vector<const std::vector<double>*>& kept, double tol) {
    Witness w;
    const std::size_t S = alpha.size();
    const std::size_t k = kept.size();
    const std::size_t cols = S + 2 + k;
    const std::size_t rows = k + 1;
    std::vector<double> a(rows * cols, 0.0), rhs(rows, 0.0), c(cols, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t s = 0; s < S; ++s) a[i * cols + s] = alpha[s] - (*kept[i])[s];
        a[i * cols + S] = -1.0;       // d+
        a[i * cols + S + 1] = 1.0;    // d-
        a[i * cols + S + 2 + i] = -1.0;  // slack
        rhs[i] = 0.0;
    }
    for (std::size_t s = 0; s < S; ++s) a[k * cols + s] = 1.0;
    rhs[k] = 1.0;
    c[S] = 1.0;
    c[S + 1] = -1.0;

    const LpResult lp = simplex_max_eq(a, rows, cols, rhs, c);
    if (lp.status == LpStatus::Unbounded) {
        // cannot happen with k >= 1; treat as "keep" to stay safe
        w.found = true;
        w.margin = std::numeric_limits<double>::infinity();
        w.belief.assign(S, 1.0 / static_cast<double>(S));
        return w;
    }
    if (lp.status != LpStatus::Optimal) {
        // numeric trouble: keeping the vector never changes the represented max
        w.found = true;
        w.margin = std::numeric_limits<double>::infinity();
        w.belief.assign(S, 1.0 / static_cast<double>(S));
        return w;
    }
    w.margin = lp.objective;
    if (lp.objective > tol) {
        w.found = true;
        w.belief.assign(lp.x.begin(), lp.x.begin() + static_cast<std::ptrdiff_t>(S));
    }
    return w;
}

bool pointwise_dominated(const std::vector<double>& x, const std::vector<double>& y,
                         double tol) {
    // y dominates x when y >= x - tol everywhere
    for (std::size_t s = 0; s < x.size(); ++s)
        if (y[s] < x[s] - tol) return false;
    return true;
}

}  // namespace

std::vector<AlphaVector> prune_alpha_set(std::vector<AlphaVector> vecs, double tol) {
    if (vecs.size() <= 1) return vecs;
    const std::size_t S = vecs[0].v.size();

    // 1) pointwise filter (earlier index wins among mutually dominating pairs)
    std::vector<char> alive(vecs.size(), 1);
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        if (!alive[i]) continue;
        for (std::size_t j = 0; j < vecs.size(); ++j) {
            if (i == j || !alive[j]) continue;
            if (pointwise_dominated(vecs[i].v, vecs[j].v, tol) &&
                (!pointwise_dominated(vecs[j].v, vecs[i].v, tol) || j < i)) {
                alive[i] = 0;
                break;
            }
        }
    }
    std::vector<AlphaVector> cand;
    cand.reserve(vecs.size());
    for (std::size_t i = 0; i < vecs.size(); ++i)
        if (alive[i]) cand.push_back(std::move(vecs[i]));
    if (cand.size() <= 1) return cand;

    // 2) witness filter, seeded with the corner-maximal vectors
    std::vector<char> kept_flag(cand.size(), 0), done(cand.size(), 0);
    std::vector<std::size_t> kept_order;
    for (std::size_t s = 0; s < S; ++s) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < cand.size(); ++i)
            if (cand[i].v[s] > cand[best].v[s]) best = i;
        if (!kept_flag[best]) {
            kept_flag[best] = 1;
            done[best] = 1;
            kept_order.push_back(best);
        }
    }
    std::vector<const std::vector<double>*> kept_ptrs;
    kept_ptrs.reserve(cand.size());
    for (std::size_t idx : kept_order) kept_ptrs.push_back(&cand[idx].v);

    for (;;) {
        std::size_t next = cand.size();
        for (std::size_t i = 0; i < cand.size(); ++i)
            if (!done[i]) {
                next = i;
                break;
            }
        if (next == cand.size()) break;
        const Witness w = find_witness(cand[next].v, kept_ptrs, tol);
        if (!w.found) {
            done[next] = 1;  // dominated; drop
            continue;
        }
        // move the candidate that is best at the witness belief into the kept set
        std::size_t best = next;
        double best_val = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (done[i]) continue;
            const double v =
                kern::active().dot(w.belief.data(), cand[i].v.data(), S);
            if (v > best_val + 1e-15) {
                best_val = v;
                best = i;
            }
        }
        done[best] = 1;
        kept_flag[best] = 1;
        kept_order.push_back(best);
        kept_ptrs.push_back(&cand[best].v);
    }

    std::sort(kept_order.begin(), kept_order.end());
    std::vector<AlphaVector> out;
    out.reserve(kept_order.size());
    for (std::size_t idx : kept_order) out.push_back(std::move(cand[idx]));
    return out;
}

std::vector<AlphaVector> exact_alpha_sets(const PomdpModel& model, std::size_t horizon,
                                          const OracleConfig& config) {
    const auto& k = kern::active();
    const std::size_t S = model.num_states();
    const double gamma = model.discount;

    std::vector<AlphaVector> gamma_set(1);
    gamma_set[0].v.assign(S, 0.0);

    std::vector<double> tmp(S), tmp2(S);

    for (std::size_t t = 0; t < horizon; ++t) {
        std::vector<AlphaVector> next_set;
        for (std::size_t a_m = 0; a_m < model.num_maint(); ++a_m) {
            for (std::size_t a_o = 0; a_o < model.num_obs_actions(); ++a_o) {
                if (!model.allowed(a_m, a_o)) continue;
                const DenseMat& J = model.joint_like(a_o);
                const std::size_t n_obs = model.num_joint_obs(a_o);

                // start the cross-sum with the immediate reward vector
                std::vector<AlphaVector> cross(1);
                cross[0].v.resize(S);
                cross[0].a_m = static_cast<int>(a_m);
                cross[0].a_o = static_cast<int>(a_o);
                for (std::size_t s = 0; s < S; ++s)
                    cross[0].v[s] = model.reward_maint.at(s, a_m) +
                                    gamma * model.reward_obs.at(s, a_o) +
                                    model.reward_damage[s];

                for (std::size_t o = 0; o < n_obs; ++o) {
                    // per-observation projections of the previous stage set
                    std::vector<AlphaVector> proj(gamma_set.size());
                    for (std::size_t i = 0; i < gamma_set.size(); ++i) {
                        k.hadamard(J.row(o), gamma_set[i].v.data(), tmp.data(), S);
                        model.transition[a_m].apply(tmp.data(), tmp2.data());
                        proj[i].v.resize(S);
                        for (std::size_t s = 0; s < S; ++s) proj[i].v[s] = gamma * tmp2[s];
                    }
                    proj = prune_alpha_set(std::move(proj), config.prune_tol);

                    if (cross.size() * proj.size() > config.max_vectors)
                        throw OracleTooLarge(
                            "alpha-vector cross-sum would exceed the vector budget");
                    std::vector<AlphaVector> folded;
                    folded.reserve(cross.size() * proj.size());
                    for (const auto& cvec : cross)
                        for (const auto& pvec : proj) {
                            AlphaVector nv;
                            nv.a_m = cvec.a_m;
                            nv.a_o = cvec.a_o;
                            nv.v.resize(S);
                            for (std::size_t s = 0; s < S; ++s)
                                nv.v[s] = cvec.v[s] + pvec.v[s];
                            folded.push_back(std::move(nv));
                        }
                    cross = prune_alpha_set(std::move(folded), config.prune_tol);
                }
                next_set.insert(next_set.end(), std::make_move_iterator(cross.begin()),
                                std::make_move_iterator(cross.end()));
                if (next_set.size() > config.max_vectors)
                    throw OracleTooLarge("alpha-vector union would exceed the vector budget");
            }
        }
        gamma_set = prune_alpha_set(std::move(next_set), config.prune_tol);
    }
    return gamma_set;
}

double exact_finite_horizon_oracle(const PomdpModel& model, std::size_t horizon,
                                   const Belief& root, const OracleConfig& config) {
    if (horizon == 0) return 0.0;
    const std::vector<AlphaVector> g = exact_alpha_sets(model, horizon, config);
    return value_of_belief(g, root).first;
}

}  // namespace voiplan
