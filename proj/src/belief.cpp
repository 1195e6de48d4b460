#include "voiplan/belief.hpp"

#include <cmath>
#include <vector>

#include "voiplan/kernels.hpp"

namespace voiplan {

void belief_predict_into(const PomdpModel& model, const Belief& b, std::size_t a_m,
                         double* out) {
    model.transition[a_m].apply_t(b.data(), out);
}

Belief belief_predict(const PomdpModel& model, const Belief& b, std::size_t a_m) {
    Belief out;
    out.p.resize(model.num_states());
    belief_predict_into(model, b, a_m, out.data());
    return out;
}

double observation_likelihood(const PomdpModel& model, const Belief& b, std::size_t a_m,
                              std::size_t a_o, const JointObservation& o) {
    std::vector<double> pred(model.num_states());
    belief_predict_into(model, b, a_m, pred.data());
    const DenseMat& J = model.joint_like(a_o);
    return kern::active().dot(J.row(model.joint_obs_index(o, a_o)), pred.data(),
                              model.num_states());
}

double posterior_from_predicted(const PomdpModel& model, const double* predicted,
                                std::size_t a_o, std::size_t joint_obs, double* out) {
    const std::size_t S = model.num_states();
    const DenseMat& J = model.joint_like(a_o);
    const double* like_row = J.row(joint_obs);
    const auto& k = kern::active();
    const double norm = k.dot(like_row, predicted, S);
    if (norm <= kZeroLikelihoodFloor) return norm;
    k.hadamard(like_row, predicted, out, S);
    k.scale(out, 1.0 / norm, S);
    return norm;
}

Belief belief_update(const PomdpModel& model, const Belief& b, std::size_t a_m,
                     std::size_t a_o, const JointObservation& o) {
    std::vector<double> pred(model.num_states());
    belief_predict_into(model, b, a_m, pred.data());
    Belief out;
    out.p.resize(model.num_states());
    const double norm = posterior_from_predicted(model, pred.data(), a_o,
                                                 model.joint_obs_index(o, a_o),
                                                 out.data());
    if (norm <= kZeroLikelihoodFloor)
        throw ZeroLikelihoodObservation(
            "belief update for an observation with likelihood <= 1e-300");
    return out;
}

double expected_reward(const PomdpModel& model, const Belief& b, std::size_t a_m,
                       std::size_t a_o) {
    const std::size_t S = model.num_states();
    const auto& k = kern::active();
    double r = 0.0;
    // reward matrices are row-major |S| x |A|; walk the action columns
    for (std::size_t s = 0; s < S; ++s)
        r += b.p[s] * (model.reward_maint.at(s, a_m) +
                       model.discount * model.reward_obs.at(s, a_o));
    r += k.dot(b.data(), model.reward_damage.data(), S);
    return r;
}

std::pair<double, std::size_t> value_of_belief(std::span<const AlphaVector> gamma_set,
                                               const Belief& b) {
    if (gamma_set.empty()) throw EmptyAlphaSet("value_of_belief on an empty alpha set");
    const auto& k = kern::active();
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < gamma_set.size(); ++i) {
        const double v = k.dot(gamma_set[i].v.data(), b.data(), b.dim());
        if (v > best) {
            best = v;
            best_i = i;
        }
    }
    return {best, best_i};
}

double belief_transition_probability(const PomdpModel& model, const Belief& b,
                                     std::size_t a_m, std::size_t a_o,
                                     const Belief& b_next) {
    const std::size_t S = model.num_states();
    std::vector<double> pred(S), post(S);
    belief_predict_into(model, b, a_m, pred.data());
    double total = 0.0;
    const std::size_t n_obs = model.num_joint_obs(a_o);
    for (std::size_t o = 0; o < n_obs; ++o) {
        const double norm = posterior_from_predicted(model, pred.data(), a_o, o, post.data());
        if (norm <= kZeroLikelihoodFloor) continue;
        bool match = true;
        for (std::size_t s = 0; s < S && match; ++s)
            match = std::abs(post[s] - b_next.p[s]) <= 1e-9;
        if (match) total += norm;
    }
    return total;
}

}  // namespace voiplan
