#pragma once
// Exact finite-horizon value computation for tiny models: exhaustive
// alpha-vector dynamic programming with dominance pruning (pointwise filter
// plus witness-LP filter, observation cross-sums folded incrementally).
// Used as ground truth by solver and metric tests; guarded against blowup.

#include <cstddef>
#include <vector>

#include "voiplan/model.hpp"

namespace voiplan {

struct OracleConfig {
    // Abort (OracleTooLarge) when any intermediate set would exceed this.
    std::size_t max_vectors = 1000000;
    // Vectors whose best advantage over the kept set is at most this are
    // discarded; the represented max-function changes by at most this much
    // per construction step.
    double prune_tol = 1e-12;
};

// The exact H-step value function as a pruned alpha-vector set; each vector
// is tagged with its first-step greedy action pair.
std::vector<AlphaVector> exact_alpha_sets(const PomdpModel& model, std::size_t horizon,
                                          const OracleConfig& config = {});

// Exact H-step discounted value at the root belief.
double exact_finite_horizon_oracle(const PomdpModel& model, std::size_t horizon,
                                   const Belief& root, const OracleConfig& config = {});

// Dominance pruning of an alpha-vector set (exposed for tests): removes
// vectors that nowhere exceed the max of the others by more than tol.
std::vector<AlphaVector> prune_alpha_set(std::vector<AlphaVector> vecs, double tol = 1e-12);

}  // namespace voiplan
