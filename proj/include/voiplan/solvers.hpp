#pragma once
// Point-based value iteration solvers, all maintaining a ValueBounds:
//  - perseus_solve: randomized asynchronous backups over a precollected
//    belief set; a sweep backs up unimproved beliefs in random order.
//  - pbvi_solve: synchronous backups over a growing belief set expanded by
//    farthest-successor (L1) sampling.
//  - gap_heuristic_solve: trial-based search choosing actions by the upper
//    bound and observations by likelihood-weighted excess gap, backing up the
//    lower bound and tightening the sawtooth upper bound on the unwind.
//
// Determinism: identical model/config/seed produce bit-identical bounds. All
// randomness flows from config.exploration_seed through counter-split
// streams; wall-clock budgets exist but should be left inert (very large)
// when reproducible output matters.

#include <string>
#include <vector>

#include "voiplan/bounds.hpp"
#include "voiplan/model.hpp"

namespace voiplan {

// Random-walk belief collection from the root (used by Perseus and exposed
// for tests): actions uniform over allowed pairs, observations sampled from
// the model, restart every `walk_len` steps. The root is always element 0.
std::vector<Belief> collect_beliefs_random_walk(const PomdpModel& model, const Belief& root,
                                                std::size_t count, std::size_t walk_len,
                                                std::uint64_t seed);

ValueBounds perseus_solve(const PomdpModel& model, const SolverConfig& config,
                          const Belief& root);

ValueBounds pbvi_solve(const PomdpModel& model, const SolverConfig& config,
                       const Belief& root);

ValueBounds gap_heuristic_solve(const PomdpModel& model, const SolverConfig& config,
                                const Belief& root);

enum class SolverKind { perseus, pbvi, gap };

const char* solver_kind_name(SolverKind kind);

// Parse "perseus" / "pbvi" / "gap"; throws ParseError on anything else.
SolverKind parse_solver_kind(const std::string& name);

ValueBounds solve_with(SolverKind kind, const PomdpModel& model, const SolverConfig& config,
                       const Belief& root);

}  // namespace voiplan
