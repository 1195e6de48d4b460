#pragma once
// POMDP data model: factored maintenance/observation action sets, transition
// and observation tensors, decomposed cost structure, discount.
//
// Action space: the agent picks one maintenance action a_m and one
// observation action a_o per step; the model may restrict which pairs are
// allowed. A "default" observation arrives every step regardless of the
// chosen actions; the observation action adds its own outcome on top, so a
// joint observation is a (default outcome, action outcome) pair with
// conditionally independent likelihood factors given the successor state.
//
// Costs are non-positive. The per-step belief reward is
//     r(b, a) = b.R_M[a_m] + discount * b.R_O[a_o] + b.R_D
// i.e. the observation cost enters discounted one step: the observation
// outcome only materializes at the next decision epoch. Several POMDP
// codebases charge observation costs undiscounted; this one deliberately
// does not.
//
// Canonical models place a trivial action first in both action sets (do
// nothing at index 0 of maintenance; a costless unit-observation-set action
// at index 0 of observations). Derived settings (e.g. permanent monitoring)
// may legitimately expose a single nontrivial-but-costless observation
// action, so triviality is checked as a predicate, not by index.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "voiplan/errors.hpp"

namespace voiplan {

// Row-major dense matrix.
struct DenseMat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    DenseMat() = default;
    DenseMat(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), a(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
    const double* row(std::size_t r) const { return a.data() + r * cols; }
    double* row(std::size_t r) { return a.data() + r * cols; }
};

// Compressed sparse rows; used for transition matrices when density < 5%.
struct CsrMat {
    std::size_t rows = 0, cols = 0;
    std::vector<std::size_t> row_ptr;  // size rows+1
    std::vector<std::uint32_t> col;
    std::vector<double> val;
};

// Transition matrix with a dense or sparse backing store, selected when the
// matrix is built (sparse when density < 5% and the matrix is reasonably
// large). Both stores implement the same operations.
class TransMat {
  public:
    TransMat() = default;

    static TransMat from_dense(DenseMat m);
    static TransMat from_csr(CsrMat m);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool sparse() const { return sparse_; }

    double at(std::size_t r, std::size_t c) const;

    // y = M x  (y length rows)
    void apply(const double* x, double* y) const;
    // y = M^T x  (y length cols)
    void apply_t(const double* x, double* y) const;
    // dot product of row r with x
    double row_dot(std::size_t r, const double* x) const;
    // smallest column index c in row r with cumulative row mass > u; assumes
    // a stochastic row and u in [0,1). Used for trajectory sampling.
    std::size_t sample_row(std::size_t r, double u) const;
    // max row sum deviation from 1 and most negative entry (for validation)
    void row_stats(double* max_row_err, double* min_entry) const;

    // Backing stores for serialization; each is null for the other storage
    // mode.
    const DenseMat* dense_store() const { return sparse_ ? nullptr : &dense_; }
    const CsrMat* csr_store() const { return sparse_ ? &csr_ : nullptr; }

  private:
    bool sparse_ = false;
    std::size_t rows_ = 0, cols_ = 0;
    DenseMat dense_;
    CsrMat csr_;
};

// Probability distribution over states; the solver's state variable.
struct Belief {
    std::vector<double> p;

    Belief() = default;
    explicit Belief(std::vector<double> probs) : p(std::move(probs)) {}
    static Belief corner(std::size_t dim, std::size_t state);

    std::size_t dim() const { return p.size(); }
    const double* data() const { return p.data(); }
    double* data() { return p.data(); }

    // entries >= -tol and total within tol of 1
    bool valid(double tol = 1e-9) const;
};

// One joint observation: an outcome from the default channel plus an outcome
// from the chosen observation action's own set.
struct JointObservation {
    std::size_t default_index = 0;
    std::size_t action_index = 0;
};

// One supporting hyperplane of the piece-wise linear convex value function,
// tagged with the greedy action pair that generated it.
struct AlphaVector {
    std::vector<double> v;
    int a_m = 0;
    int a_o = 0;
};

struct PomdpModel {
    // --- identity / labels ---
    std::vector<std::string> state_names;        // size |S|
    std::vector<std::string> maint_names;        // size |A_M|, index 0 = "do nothing" in canonical models
    std::vector<std::string> obs_action_names;   // size |A_O|, index 0 = trivial in canonical models

    // --- dynamics ---
    std::vector<TransMat> transition;            // per a_m, |S| x |S| row-stochastic

    // --- observation channels ---
    DenseMat default_obs;                        // |S| x |Omega_e| row-stochastic (cols==1: uninformative)
    std::vector<DenseMat> obs_model;             // per a_o, |S| x |Omega_{a_o}| row-stochastic

    // --- costs (all entries <= 0) ---
    DenseMat reward_maint;                       // |S| x |A_M|
    DenseMat reward_obs;                         // |S| x |A_O|
    std::vector<double> reward_damage;           // |S|

    double discount = 0.95;

    // Allowed (a_m, a_o) pairs; empty means all pairs allowed.
    // Index: a_m * |A_O| + a_o, value 0/1.
    std::vector<std::uint8_t> allowed_mask;

    std::size_t initial_state = 0;
    // Optional distribution-valued start; empty means a point mass on
    // initial_state.
    std::vector<double> initial_belief_probs;

    // --- sizes ---
    std::size_t num_states() const { return state_names.size(); }
    std::size_t num_maint() const { return maint_names.size(); }
    std::size_t num_obs_actions() const { return obs_action_names.size(); }
    std::size_t num_default_obs() const { return default_obs.cols; }
    std::size_t num_action_obs(std::size_t a_o) const { return obs_model[a_o].cols; }
    std::size_t num_joint_obs(std::size_t a_o) const {
        return num_default_obs() * num_action_obs(a_o);
    }

    // joint observation index <-> (default, action) pair
    std::size_t joint_obs_index(const JointObservation& o, std::size_t a_o) const {
        return o.default_index * num_action_obs(a_o) + o.action_index;
    }
    JointObservation joint_obs_at(std::size_t idx, std::size_t a_o) const {
        const std::size_t k = num_action_obs(a_o);
        return JointObservation{idx / k, idx % k};
    }

    bool allowed(std::size_t a_m, std::size_t a_o) const {
        if (allowed_mask.empty()) return true;
        return allowed_mask[a_m * num_obs_actions() + a_o] != 0;
    }
    std::vector<std::pair<std::size_t, std::size_t>> allowed_pairs() const;

    // Costless action with a unit observation set: adds nothing beyond the
    // default channel.
    bool is_trivial_obs_action(std::size_t a_o) const;
    // Lowest-index trivial observation action, or -1 if none exists.
    int trivial_obs_action() const;
    // Cheapest allowed observation action for a_m (ties to lowest index).
    std::size_t cheapest_obs_action_for(std::size_t a_m) const;

    Belief initial_belief() const {
        if (!initial_belief_probs.empty()) return Belief(initial_belief_probs);
        return Belief::corner(num_states(), initial_state);
    }

    // Joint observation likelihood rows: joint_like(a_o) row o is the
    // length-|S| vector p(o_e|s') * p(o_a|s', a_o). Built by finalize().
    const DenseMat& joint_like(std::size_t a_o) const { return joint_like_[a_o]; }

    // Builds derived caches; idempotent. Builders and parsers call this after
    // populating the public fields. validate() calls it as needed.
    void finalize();

    // Checks all structural invariants; throws SpecInvariantViolation with a
    // description of the first violation found.
    void validate() const;

  private:
    std::vector<DenseMat> joint_like_;
};

// Largest acceptable |row sum - 1| for stochastic rows.
inline constexpr double kStochasticTol = 1e-9;
// Likelihoods at or below this floor are treated as impossible branches.
inline constexpr double kZeroLikelihoodFloor = 1e-300;

}  // namespace voiplan
