#pragma once
// Single-step belief-space mathematics: prediction, Bayesian update,
// observation likelihoods, expected one-step reward, and value of a belief
// under a set of alpha-vectors.

#include <cstddef>
#include <span>
#include <utility>

#include "voiplan/model.hpp"

namespace voiplan {

// b_pred(s') = sum_s p(s'|s, a_m) b(s)
Belief belief_predict(const PomdpModel& model, const Belief& b, std::size_t a_m);
void belief_predict_into(const PomdpModel& model, const Belief& b, std::size_t a_m,
                         double* out);

// p(o | b, a) = sum_s' p(o_e|s') p(o_a|s', a_o) b_pred(s')
double observation_likelihood(const PomdpModel& model, const Belief& b, std::size_t a_m,
                              std::size_t a_o, const JointObservation& o);

// Normalized posterior; throws ZeroLikelihoodObservation when the likelihood
// is at or below the numeric floor.
Belief belief_update(const PomdpModel& model, const Belief& b, std::size_t a_m,
                     std::size_t a_o, const JointObservation& o);

// Solver workhorse: posterior computed from an already-predicted belief.
// Writes the normalized posterior into `out` (length |S|) and returns the
// likelihood; when the likelihood is at or below the floor, `out` is left
// untouched and the caller must skip the branch. `joint_obs` indexes the
// model's joint observation enumeration for a_o.
double posterior_from_predicted(const PomdpModel& model, const double* predicted,
                                std::size_t a_o, std::size_t joint_obs, double* out);

// r(b, a) = b.R_M[a_m] + discount * b.R_O[a_o] + b.R_D
double expected_reward(const PomdpModel& model, const Belief& b, std::size_t a_m,
                       std::size_t a_o);

// max over alpha of b.alpha plus the argmax index (ties -> lowest index).
// Throws EmptyAlphaSet.
std::pair<double, std::size_t> value_of_belief(std::span<const AlphaVector> gamma_set,
                                               const Belief& b);

// Probability of landing exactly on belief b_next (within L-inf 1e-9) after
// taking (a_m, a_o) from b: the total likelihood of all joint observations
// whose posterior equals b_next.
double belief_transition_probability(const PomdpModel& model, const Belief& b,
                                     std::size_t a_m, std::size_t a_o,
                                     const Belief& b_next);

}  // namespace voiplan
