#include "voiplan/casestudies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "voiplan/errors.hpp"
#include "voiplan/rng.hpp"

namespace voiplan {

namespace {

DenseMat mat3(std::initializer_list<double> v) {
    DenseMat m(3, 3, 0.0);
    std::copy(v.begin(), v.end(), m.a.begin());
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Three-component system
// ---------------------------------------------------------------------------

ComponentSpec ComponentSpec::standard() {
    ComponentSpec s;
    s.condition_count = 3;
    s.p_do_nothing = {
        mat3({0.82, 0.13, 0.05,  //
              0.00, 0.87, 0.13,  //
              0.00, 0.00, 1.00}),
        mat3({0.72, 0.19, 0.09,  //
              0.00, 0.78, 0.22,  //
              0.00, 0.00, 1.00}),
        mat3({0.79, 0.17, 0.04,  //
              0.00, 0.85, 0.15,  //
              0.00, 0.00, 1.00}),
    };
    s.p_repair = mat3({0.90, 0.10, 0.00,  //
                       0.80, 0.20, 0.00,  //
                       0.70, 0.30, 0.00});
    s.repair_cost = {-12.0, -18.0, -30.0};
    s.observe_cost = {-1.0, -1.0, -1.0};
    s.damage_cost = {0.0, -5.0, -12.0};
    return s;
}

double SystemPenaltyTable::penalty(std::array<int, 3> sorted_conditions) const {
    for (const Entry& e : entries)
        if (e.conditions == sorted_conditions) return e.value;
    return 0.0;
}

SystemPenaltyTable SystemPenaltyTable::standard() {
    SystemPenaltyTable t;
    // ascending 0-based condition triples
    t.entries = {
        {{0, 1, 1}, -5.0},   //
        {{1, 1, 1}, -10.0},  //
        {{0, 1, 2}, -10.0},  //
        {{1, 1, 2}, -10.0},  //
        {{0, 2, 2}, -14.0},  //
        {{1, 2, 2}, -14.0},  //
        {{2, 2, 2}, -18.0},
    };
    return t;
}

DenseMat component_observation_matrix(double p) {
    DenseMat o(3, 3, (1.0 - p) / 2.0);
    for (std::size_t i = 0; i < 3; ++i) o.at(i, i) = p;
    return o;
}

namespace {

std::array<int, 3> joint_conditions(std::size_t s) {
    return {static_cast<int>(s / 9), static_cast<int>((s / 3) % 3),
            static_cast<int>(s % 3)};
}

std::array<int, 3> mask_bits(std::size_t mask) {
    // component 1 most significant
    return {static_cast<int>((mask >> 2) & 1), static_cast<int>((mask >> 1) & 1),
            static_cast<int>(mask & 1)};
}

std::string mask_name(const char* prefix, std::size_t mask) {
    const auto bits = mask_bits(mask);
    std::string s = prefix;
    s += ":";
    bool any = false;
    for (int i = 0; i < 3; ++i) {
        if (!bits[i]) continue;
        if (any) s += "+";
        s += std::to_string(i + 1);
        any = true;
    }
    if (!any) s += "none";
    return s;
}

// Kronecker product of three 3x3 (or 3x1) per-component factors, component 1
// outermost.
DenseMat kron3(const DenseMat& a, const DenseMat& b, const DenseMat& c) {
    DenseMat out(a.rows * b.rows * c.rows, a.cols * b.cols * c.cols, 0.0);
    for (std::size_t i1 = 0; i1 < a.rows; ++i1)
        for (std::size_t i2 = 0; i2 < b.rows; ++i2)
            for (std::size_t i3 = 0; i3 < c.rows; ++i3) {
                const std::size_t r = (i1 * b.rows + i2) * c.rows + i3;
                for (std::size_t j1 = 0; j1 < a.cols; ++j1)
                    for (std::size_t j2 = 0; j2 < b.cols; ++j2)
                        for (std::size_t j3 = 0; j3 < c.cols; ++j3)
                            out.at(r, (j1 * b.cols + j2) * c.cols + j3) =
                                a.at(i1, j1) * b.at(i2, j2) * c.at(i3, j3);
            }
    return out;
}

}  // namespace

PomdpModel build_three_component(double p, int setting) {
    if (p < 0.0 || p > 1.0)
        throw SpecInvariantViolation("build_three_component: accuracy p must be in [0,1]");
    if (setting != 1 && setting != 2)
        throw SpecInvariantViolation("build_three_component: setting must be 1 or 2");

    const ComponentSpec spec = ComponentSpec::standard();
    const SystemPenaltyTable penalties = SystemPenaltyTable::standard();
    const DenseMat obs = component_observation_matrix(p);
    const DenseMat unit(3, 1, 1.0);  // unobserved component contributes nothing

    PomdpModel m;
    m.discount = 0.95;
    m.initial_state = 0;

    for (std::size_t s = 0; s < 27; ++s) {
        const auto c = joint_conditions(s);
        m.state_names.push_back("(" + std::to_string(c[0] + 1) + "," +
                                std::to_string(c[1] + 1) + "," + std::to_string(c[2] + 1) +
                                ")");
    }

    // maintenance side: 8 repair subsets
    m.reward_maint = DenseMat(27, 8, 0.0);
    m.reward_damage.assign(27, 0.0);
    for (std::size_t mask = 0; mask < 8; ++mask) {
        m.maint_names.push_back(mask_name("repair", mask));
        const auto bits = mask_bits(mask);
        const DenseMat& p1 = bits[0] ? spec.p_repair : spec.p_do_nothing[0];
        const DenseMat& p2 = bits[1] ? spec.p_repair : spec.p_do_nothing[1];
        const DenseMat& p3 = bits[2] ? spec.p_repair : spec.p_do_nothing[2];
        m.transition.push_back(TransMat::from_dense(kron3(p1, p2, p3)));
        for (std::size_t s = 0; s < 27; ++s) {
            const auto c = joint_conditions(s);
            double r = 0.0;
            for (int i = 0; i < 3; ++i)
                if (bits[i]) r += spec.repair_cost[c[i]];
            m.reward_maint.at(s, mask) = r;
        }
    }
    for (std::size_t s = 0; s < 27; ++s) {
        auto c = joint_conditions(s);
        double d = spec.damage_cost[c[0]] + spec.damage_cost[c[1]] + spec.damage_cost[c[2]];
        std::sort(c.begin(), c.end());
        m.reward_damage[s] = d + penalties.penalty(c);
    }

    m.default_obs = DenseMat(27, 1, 1.0);  // blind default

    if (setting == 1) {
        m.reward_obs = DenseMat(27, 8, 0.0);
        for (std::size_t mask = 0; mask < 8; ++mask) {
            m.obs_action_names.push_back(mask_name("observe", mask));
            const auto bits = mask_bits(mask);
            m.obs_model.push_back(kron3(bits[0] ? obs : unit, bits[1] ? obs : unit,
                                        bits[2] ? obs : unit));
            for (std::size_t s = 0; s < 27; ++s) {
                const auto c = joint_conditions(s);
                double r = 0.0;
                for (int i = 0; i < 3; ++i)
                    if (bits[i]) r += spec.observe_cost[c[i]];
                m.reward_obs.at(s, mask) = r;
            }
        }
    } else {
        m.obs_action_names = {"monitor"};
        m.obs_model = {kron3(obs, obs, obs)};
        m.reward_obs = DenseMat(27, 1, 0.0);
    }

    m.finalize();
    m.validate();
    return m;
}

PomdpModel with_condition_default_channel(PomdpModel model, double q) {
    if (model.num_states() != 27)
        throw SpecInvariantViolation(
            "with_condition_default_channel: expects the 27-state three-component model");
    if (q < 0.0 || q > 1.0)
        throw SpecInvariantViolation("with_condition_default_channel: q must be in [0,1]");
    const DenseMat obs = component_observation_matrix(q);
    model.default_obs = kron3(obs, obs, obs);
    model.finalize();
    model.validate();
    return model;
}

// ---------------------------------------------------------------------------
// Corroding deck
// ---------------------------------------------------------------------------

void DeckModelSpec::validate() const {
    const std::size_t C = condition_count;
    if (C < 2) throw SpecInvariantViolation("deck spec: need at least 2 condition levels");
    if (rate_count < 1) throw SpecInvariantViolation("deck spec: need at least 1 rate bin");
    if (horizon < 1) throw SpecInvariantViolation("deck spec: need at least 1 time step");
    if (!(discount > 0.0 && discount < 1.0))
        throw SpecInvariantViolation("deck spec: discount must lie in (0,1)");
    if (stay.rows != rate_count || stay.cols != C || advance.rows != rate_count ||
        advance.cols != C)
        throw SpecInvariantViolation("deck spec: stay/advance must be rate_count x "
                                     "condition_count");
    for (std::size_t r = 0; r < rate_count; ++r) {
        for (std::size_t c = 0; c < C; ++c) {
            const double st = stay.at(r, c), ad = advance.at(r, c);
            if (st < 0.0 || ad < 0.0 || std::abs(st + ad - 1.0) > kStochasticTol)
                throw SpecInvariantViolation(
                    "deck spec: stay+advance must be a distribution at every (rate, "
                    "condition)");
        }
        if (advance.at(r, C - 1) != 0.0)
            throw SpecInvariantViolation(
                "deck spec: the worst condition cannot advance further");
    }
    auto check_block = [C](const DenseMat& b, const char* what) {
        if (b.rows != C || b.cols != C)
            throw SpecInvariantViolation(std::string("deck spec: ") + what +
                                         " must be condition_count^2");
        for (std::size_t r = 0; r < C; ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                if (b.at(r, c) < 0.0)
                    throw SpecInvariantViolation(std::string("deck spec: ") + what +
                                                 " has a negative entry");
                sum += b.at(r, c);
            }
            if (std::abs(sum - 1.0) > kStochasticTol)
                throw SpecInvariantViolation(std::string("deck spec: ") + what +
                                             " rows must sum to 1");
        }
    };
    check_block(minor_block, "minor repair block");
    check_block(major_block, "major repair block");
    check_block(visual_obs, "visual observation matrix");
    check_block(monitor_obs, "monitoring observation matrix");
    auto check_cost = [C](const std::vector<double>& v, const char* what) {
        if (v.size() != C)
            throw SpecInvariantViolation(std::string("deck spec: ") + what +
                                         " needs one entry per condition");
        for (double x : v)
            if (x > 0.0)
                throw SpecInvariantViolation(std::string("deck spec: ") + what +
                                             " entries must be <= 0");
    };
    check_cost(minor_cost, "minor repair cost");
    check_cost(major_cost, "major repair cost");
    check_cost(replace_cost, "replacement cost");
    check_cost(damage_cost, "damage cost");
    if (visual_cost > 0.0 || monitor_cost > 0.0)
        throw SpecInvariantViolation("deck spec: observation costs must be <= 0");
}

DeckModelSpec synth_deck_spec(std::uint64_t seed, const DeckShape& shape) {
    DeckModelSpec spec;
    spec.rate_count = shape.rate_count;
    spec.horizon = shape.horizon;
    const std::size_t R = spec.rate_count;
    const std::size_t C = spec.condition_count;

    spec.stay = DenseMat(R, C, 1.0);
    spec.advance = DenseMat(R, C, 0.0);
    const double jitter = std::clamp(shape.jitter, 0.0, 0.95);
    for (std::size_t c = 0; c + 1 < C; ++c) {
        Rng rng = Rng::split(seed, 0xDECC0000ULL + c);
        std::vector<double> cum(R, 0.0);
        for (std::size_t r = 1; r < R; ++r)
            cum[r] = cum[r - 1] + 1.0 + jitter * (2.0 * rng.uniform() - 1.0);
        const double lo = shape.advance_start[c], hi = shape.advance_end[c];
        const double total = cum[R - 1] > 0.0 ? cum[R - 1] : 1.0;
        for (std::size_t r = 0; r < R; ++r) {
            const double a = lo + (hi - lo) * (cum[r] / total);
            spec.advance.at(r, c) = a;
            spec.stay.at(r, c) = 1.0 - a;
        }
    }

    DenseMat minor(C, C, 0.0);
    minor.at(0, 0) = 1.0;
    minor.at(1, 0) = 0.85;
    minor.at(1, 1) = 0.15;
    minor.at(2, 1) = 0.80;
    minor.at(2, 2) = 0.20;
    minor.at(3, 2) = 0.65;
    minor.at(3, 3) = 0.35;
    spec.minor_block = std::move(minor);

    DenseMat major(C, C, 0.0);
    major.at(0, 0) = 1.0;
    major.at(1, 0) = 0.95;
    major.at(1, 1) = 0.05;
    major.at(2, 0) = 0.90;
    major.at(2, 1) = 0.10;
    major.at(3, 0) = 0.75;
    major.at(3, 1) = 0.20;
    major.at(3, 2) = 0.05;
    spec.major_block = std::move(major);

    DenseMat vis(C, C, 0.0);
    vis.at(0, 0) = 0.63;
    vis.at(0, 1) = 0.37;
    vis.at(1, 0) = 0.10;
    vis.at(1, 1) = 0.63;
    vis.at(1, 2) = 0.27;
    vis.at(2, 1) = 0.10;
    vis.at(2, 2) = 0.63;
    vis.at(2, 3) = 0.27;
    vis.at(3, 2) = 0.20;
    vis.at(3, 3) = 0.80;
    spec.visual_obs = std::move(vis);

    DenseMat mon(C, C, 0.0);
    mon.at(0, 0) = 0.80;
    mon.at(0, 1) = 0.20;
    mon.at(1, 0) = 0.05;
    mon.at(1, 1) = 0.80;
    mon.at(1, 2) = 0.15;
    mon.at(2, 1) = 0.05;
    mon.at(2, 2) = 0.80;
    mon.at(2, 3) = 0.15;
    mon.at(3, 2) = 0.10;
    mon.at(3, 3) = 0.90;
    spec.monitor_obs = std::move(mon);

    spec.minor_cost = {-60.0, -110.0, -160.0, -280.0};
    spec.major_cost = {-105.0, -195.0, -290.0, -390.0};
    spec.replace_cost = {-820.0, -820.0, -820.0, -820.0};
    spec.damage_cost = {-5.0, -40.0, -120.0, -250.0};
    spec.visual_cost = -4.5;
    spec.monitor_cost = -7.5;
    spec.discount = 0.95;
    spec.validate();
    return spec;
}

namespace {

struct CsrBuilder {
    CsrMat m;
    explicit CsrBuilder(std::size_t rows, std::size_t cols) {
        m.rows = rows;
        m.cols = cols;
        m.row_ptr.assign(1, 0);
    }
    void add(std::size_t col, double v) {
        if (v == 0.0) return;
        m.col.push_back(static_cast<std::uint32_t>(col));
        m.val.push_back(v);
    }
    void end_row() { m.row_ptr.push_back(m.col.size()); }
};

}  // namespace

PomdpModel build_deck_model(const DeckModelSpec& spec, int setting) {
    spec.validate();
    if (setting != 1 && setting != 2)
        throw SpecInvariantViolation("build_deck_model: setting must be 1 or 2");

    const std::size_t C = spec.condition_count;
    const std::size_t R = spec.rate_count;
    const std::size_t H = spec.horizon;
    const std::size_t S = spec.num_states();
    const std::size_t terminal = S - 1;
    const auto idx = [&](std::size_t t, std::size_t r, std::size_t c) {
        return ((t * R) + r) * C + c;
    };

    PomdpModel m;
    m.discount = spec.discount;
    m.initial_state = 0;

    m.state_names.reserve(S);
    for (std::size_t t = 0; t < H; ++t)
        for (std::size_t r = 0; r < R; ++r)
            for (std::size_t c = 0; c < C; ++c)
                m.state_names.push_back("t" + std::to_string(t) + "r" +
                                        std::to_string(r + 1) + "c" +
                                        std::to_string(c + 1));
    m.state_names.push_back("end");

    m.maint_names = {"none", "minor", "major", "replace"};
    enum { kNone = 0, kMinor = 1, kMajor = 2, kReplace = 3 };

    for (int a = 0; a < 4; ++a) {
        CsrBuilder b(S, S);
        for (std::size_t t = 0; t < H; ++t) {
            const bool last = t + 1 == H;
            for (std::size_t r = 0; r < R; ++r) {
                for (std::size_t c = 0; c < C; ++c) {
                    if (last) {
                        b.add(terminal, 1.0);
                        b.end_row();
                        continue;
                    }
                    switch (a) {
                        case kNone: {
                            const std::size_t r2 = std::min(r + 1, R - 1);
                            b.add(idx(t + 1, r2, c), spec.stay.at(r, c));
                            if (c + 1 < C) b.add(idx(t + 1, r2, c + 1), spec.advance.at(r, c));
                            break;
                        }
                        case kMinor: {
                            const std::size_t r2 = std::min(r + 1, R - 1);
                            for (std::size_t c2 = 0; c2 < C; ++c2)
                                b.add(idx(t + 1, r2, c2), spec.minor_block.at(c, c2));
                            break;
                        }
                        case kMajor: {
                            const std::size_t r2 = r >= 3 ? r - 3 : 0;
                            for (std::size_t c2 = 0; c2 < C; ++c2)
                                b.add(idx(t + 1, r2, c2), spec.major_block.at(c, c2));
                            break;
                        }
                        case kReplace:
                            b.add(idx(t + 1, 0, 0), 1.0);
                            break;
                    }
                    b.end_row();
                }
            }
        }
        b.add(terminal, 1.0);  // terminal self-loop
        b.end_row();
        m.transition.push_back(TransMat::from_csr(std::move(b.m)));
    }

    m.reward_maint = DenseMat(S, 4, 0.0);
    m.reward_damage.assign(S, 0.0);
    for (std::size_t s = 0; s < terminal; ++s) {
        const std::size_t c = s % C;
        m.reward_maint.at(s, kMinor) = spec.minor_cost[c];
        m.reward_maint.at(s, kMajor) = spec.major_cost[c];
        m.reward_maint.at(s, kReplace) = spec.replace_cost[c];
        m.reward_damage[s] = spec.damage_cost[c];
    }

    m.default_obs = DenseMat(S, 1, 1.0);

    const auto condition_channel = [&](const DenseMat& block) {
        DenseMat o(S, C, 0.0);
        for (std::size_t s = 0; s < terminal; ++s) {
            const std::size_t c = s % C;
            for (std::size_t j = 0; j < C; ++j) o.at(s, j) = block.at(c, j);
        }
        for (std::size_t j = 0; j < C; ++j)
            o.at(terminal, j) = 1.0 / static_cast<double>(C);
        return o;
    };

    if (setting == 1) {
        m.obs_action_names = {"none", "visual", "monitoring"};
        m.obs_model = {DenseMat(S, 1, 1.0), condition_channel(spec.visual_obs),
                       condition_channel(spec.monitor_obs)};
        m.reward_obs = DenseMat(S, 3, 0.0);
        for (std::size_t s = 0; s < terminal; ++s) {
            m.reward_obs.at(s, 1) = spec.visual_cost;
            m.reward_obs.at(s, 2) = spec.monitor_cost;
        }
        // replacement's outcome is certain, so it never pairs with an
        // inspection: 10 pairs instead of 12
        m.allowed_mask.assign(4 * 3, 1);
        m.allowed_mask[kReplace * 3 + 1] = 0;
        m.allowed_mask[kReplace * 3 + 2] = 0;
    } else {
        m.obs_action_names = {"monitoring"};
        m.obs_model = {condition_channel(spec.monitor_obs)};
        m.reward_obs = DenseMat(S, 1, 0.0);
    }

    m.finalize();
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// Condition-triggered repair policies
// ---------------------------------------------------------------------------

std::string ConditionBasedPolicy::name() const {
    std::string s = "repair@{";
    bool any = false;
    for (int c = 0; c < 3; ++c) {
        if (!repair_when[c]) continue;
        if (any) s += ",";
        s += std::to_string(c + 1);
        any = true;
    }
    s += "}";
    if (!any) return "never-repair";
    return s;
}

std::vector<ConditionBasedPolicy> enumerate_condition_policies() {
    std::vector<ConditionBasedPolicy> out;
    for (std::size_t mask = 0; mask < 8; ++mask) {
        ConditionBasedPolicy p;
        for (int c = 0; c < 3; ++c) p.repair_when[c] = (mask >> c) & 1;
        out.push_back(p);
    }
    return out;
}

namespace {

// Dense linear solve by Gaussian elimination with partial pivoting.
std::vector<double> solve_linear(DenseMat a, std::vector<double> rhs) {
    const std::size_t n = a.rows;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n; ++r)
            if (std::abs(a.at(r, k)) > std::abs(a.at(piv, k))) piv = r;
        if (std::abs(a.at(piv, k)) < 1e-14)
            throw SpecInvariantViolation("policy evaluation: singular linear system");
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a.at(k, c), a.at(piv, c));
            std::swap(rhs[k], rhs[piv]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const double f = a.at(r, k) / a.at(k, k);
            if (f == 0.0) continue;
            for (std::size_t c = k; c < n; ++c) a.at(r, c) -= f * a.at(k, c);
            rhs[r] -= f * rhs[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double acc = rhs[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= a.at(r, c) * x[c];
        x[r] = acc / a.at(r, r);
    }
    return x;
}

}  // namespace

double evaluate_condition_policy(const PomdpModel& model, double p,
                                 const ConditionBasedPolicy& policy) {
    if (model.num_states() != 27 || model.num_maint() != 8)
        throw SpecInvariantViolation(
            "evaluate_condition_policy: expects the 27-state three-component model");
    if (p < 0.0 || p > 1.0)
        throw SpecInvariantViolation("evaluate_condition_policy: p must be in [0,1]");

    const DenseMat obs = component_observation_matrix(p);
    const double gamma = model.discount;

    // Per state: mix the 8 joint repair actions with the probability that the
    // observed condition triple triggers them.
    DenseMat a(27, 27, 0.0);
    std::vector<double> rhs(27, 0.0);
    for (std::size_t s = 0; s < 27; ++s) {
        const auto c = joint_conditions(s);
        double q[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        for (std::size_t o = 0; o < 27; ++o) {
            const auto oc = joint_conditions(o);
            const double like =
                obs.at(c[0], oc[0]) * obs.at(c[1], oc[1]) * obs.at(c[2], oc[2]);
            if (like == 0.0) continue;
            const std::size_t act = (policy.repair_when[oc[0]] ? 4u : 0u) +
                                    (policy.repair_when[oc[1]] ? 2u : 0u) +
                                    (policy.repair_when[oc[2]] ? 1u : 0u);
            q[act] += like;
        }
        a.at(s, s) += 1.0;
        for (std::size_t act = 0; act < 8; ++act) {
            if (q[act] == 0.0) continue;
            rhs[s] += q[act] * (model.reward_maint.at(s, act) + model.reward_damage[s]);
            for (std::size_t s2 = 0; s2 < 27; ++s2) {
                const double tp = model.transition[act].at(s, s2);
                if (tp != 0.0) a.at(s, s2) -= gamma * q[act] * tp;
            }
        }
    }
    const std::vector<double> v = solve_linear(std::move(a), std::move(rhs));
    return v[model.initial_state];
}

std::vector<PolicyEvaluation> evaluate_condition_policies(const PomdpModel& model,
                                                          double p) {
    std::vector<PolicyEvaluation> out;
    for (const ConditionBasedPolicy& pol : enumerate_condition_policies())
        out.push_back({pol, evaluate_condition_policy(model, p, pol)});
    return out;
}

std::size_t best_condition_policy(const std::vector<PolicyEvaluation>& evals) {
    if (evals.empty())
        throw SpecInvariantViolation("best_condition_policy: empty evaluation list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < evals.size(); ++i)
        if (evals[i].value > evals[best].value) best = i;
    return best;
}

}  // namespace voiplan
