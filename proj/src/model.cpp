#include "voiplan/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "voiplan/kernels.hpp"

namespace voiplan {

namespace {
constexpr double kSparseDensityCutoff = 0.05;
constexpr std::size_t kSparseMinDim = 64;  // small matrices stay dense
}  // namespace

TransMat TransMat::from_dense(DenseMat m) {
    TransMat t;
    t.rows_ = m.rows;
    t.cols_ = m.cols;
    std::size_t nnz = 0;
    for (double v : m.a)
        if (v != 0.0) ++nnz;
    const double density =
        m.a.empty() ? 1.0 : static_cast<double>(nnz) / static_cast<double>(m.a.size());
    if (density < kSparseDensityCutoff && m.rows >= kSparseMinDim) {
        t.sparse_ = true;
        CsrMat& s = t.csr_;
        s.rows = m.rows;
        s.cols = m.cols;
        s.row_ptr.assign(m.rows + 1, 0);
        s.col.reserve(nnz);
        s.val.reserve(nnz);
        for (std::size_t r = 0; r < m.rows; ++r) {
            for (std::size_t c = 0; c < m.cols; ++c) {
                const double v = m.at(r, c);
                if (v != 0.0) {
                    s.col.push_back(static_cast<std::uint32_t>(c));
                    s.val.push_back(v);
                }
            }
            s.row_ptr[r + 1] = s.col.size();
        }
    } else {
        t.sparse_ = false;
        t.dense_ = std::move(m);
    }
    return t;
}

TransMat TransMat::from_csr(CsrMat m) {
    TransMat t;
    t.sparse_ = true;
    t.rows_ = m.rows;
    t.cols_ = m.cols;
    t.csr_ = std::move(m);
    if (t.csr_.row_ptr.size() != t.rows_ + 1)
        throw SpecInvariantViolation("TransMat::from_csr: row_ptr size mismatch");
    return t;
}

double TransMat::at(std::size_t r, std::size_t c) const {
    if (!sparse_) return dense_.at(r, c);
    for (std::size_t k = csr_.row_ptr[r]; k < csr_.row_ptr[r + 1]; ++k)
        if (csr_.col[k] == c) return csr_.val[k];
    return 0.0;
}

void TransMat::apply(const double* x, double* y) const {
    if (!sparse_) {
        kern::active().matvec(dense_.a.data(), rows_, cols_, x, y);
        return;
    }
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (std::size_t k = csr_.row_ptr[r]; k < csr_.row_ptr[r + 1]; ++k)
            acc += csr_.val[k] * x[csr_.col[k]];
        y[r] = acc;
    }
}

void TransMat::apply_t(const double* x, double* y) const {
    if (!sparse_) {
        kern::active().matvec_t(dense_.a.data(), rows_, cols_, x, y);
        return;
    }
    std::fill(y, y + cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        for (std::size_t k = csr_.row_ptr[r]; k < csr_.row_ptr[r + 1]; ++k)
            y[csr_.col[k]] += xr * csr_.val[k];
    }
}

double TransMat::row_dot(std::size_t r, const double* x) const {
    if (!sparse_) return kern::active().dot(dense_.row(r), x, cols_);
    double acc = 0.0;
    for (std::size_t k = csr_.row_ptr[r]; k < csr_.row_ptr[r + 1]; ++k)
        acc += csr_.val[k] * x[csr_.col[k]];
    return acc;
}

std::size_t TransMat::sample_row(std::size_t r, double u) const {
    double cum = 0.0;
    if (!sparse_) {
        const double* row = dense_.row(r);
        for (std::size_t c = 0; c < cols_; ++c) {
            cum += row[c];
            if (u < cum) return c;
        }
        // numeric slack: return the last column with positive mass
        for (std::size_t c = cols_; c-- > 0;)
            if (row[c] > 0.0) return c;
        return cols_ - 1;
    }
    std::size_t last_pos = cols_ - 1;
    for (std::size_t k = csr_.row_ptr[r]; k < csr_.row_ptr[r + 1]; ++k) {
        cum += csr_.val[k];
        if (csr_.val[k] > 0.0) last_pos = csr_.col[k];
        if (u < cum) return csr_.col[k];
    }
    return last_pos;
}

void TransMat::row_stats(double* max_row_err, double* min_entry) const {
    double err = 0.0, mn = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows_; ++r) {
        double s = 0.0;
        if (!sparse_) {
            const double* row = dense_.row(r);
            for (std::size_t c = 0; c < cols_; ++c) {
                s += row[c];
                mn = std::min(mn, row[c]);
            }
        } else {
            for (std::size_t k = csr_.row_ptr[r]; k < csr_.row_ptr[r + 1]; ++k) {
                s += csr_.val[k];
                mn = std::min(mn, csr_.val[k]);
            }
            if (csr_.row_ptr[r] == csr_.row_ptr[r + 1]) mn = std::min(mn, 0.0);
        }
        err = std::max(err, std::abs(s - 1.0));
    }
    if (rows_ == 0) mn = 0.0;
    *max_row_err = err;
    *min_entry = mn;
}

Belief Belief::corner(std::size_t dim, std::size_t state) {
    Belief b;
    b.p.assign(dim, 0.0);
    b.p[state] = 1.0;
    return b;
}

bool Belief::valid(double tol) const {
    double s = 0.0;
    for (double v : p) {
        if (!(v >= -tol) || !std::isfinite(v)) return false;
        s += v;
    }
    return std::abs(s - 1.0) <= tol;
}

std::vector<std::pair<std::size_t, std::size_t>> PomdpModel::allowed_pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(num_maint() * num_obs_actions());
    for (std::size_t m = 0; m < num_maint(); ++m)
        for (std::size_t o = 0; o < num_obs_actions(); ++o)
            if (allowed(m, o)) out.emplace_back(m, o);
    return out;
}

bool PomdpModel::is_trivial_obs_action(std::size_t a_o) const {
    if (obs_model[a_o].cols != 1) return false;
    for (std::size_t s = 0; s < num_states(); ++s)
        if (reward_obs.at(s, a_o) != 0.0) return false;
    return true;
}

int PomdpModel::trivial_obs_action() const {
    for (std::size_t a = 0; a < num_obs_actions(); ++a)
        if (is_trivial_obs_action(a)) return static_cast<int>(a);
    return -1;
}

std::size_t PomdpModel::cheapest_obs_action_for(std::size_t a_m) const {
    std::size_t best = num_obs_actions();
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < num_obs_actions(); ++a) {
        if (!allowed(a_m, a)) continue;
        double worst = 0.0;  // costs are <= 0; take the most negative entry
        for (std::size_t s = 0; s < num_states(); ++s)
            worst = std::min(worst, reward_obs.at(s, a));
        const double cost = -worst;
        if (cost < best_cost) {
            best_cost = cost;
            best = a;
        }
    }
    if (best == num_obs_actions())
        throw SpecInvariantViolation("maintenance action " + std::to_string(a_m) +
                                     " has no allowed observation action");
    return best;
}

void PomdpModel::finalize() {
    const std::size_t S = num_states();
    joint_like_.assign(num_obs_actions(), DenseMat());
    for (std::size_t a = 0; a < num_obs_actions(); ++a) {
        const std::size_t ne = num_default_obs();
        const std::size_t na = obs_model[a].cols;
        DenseMat J(ne * na, S);
        for (std::size_t oe = 0; oe < ne; ++oe)
            for (std::size_t oa = 0; oa < na; ++oa) {
                double* row = J.row(oe * na + oa);
                for (std::size_t s = 0; s < S; ++s)
                    row[s] = default_obs.at(s, oe) * obs_model[a].at(s, oa);
            }
        joint_like_[a] = std::move(J);
    }
}

namespace {

void check_stochastic_dense(const DenseMat& m, const std::string& what) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) {
            const double v = m.at(r, c);
            if (!(v >= 0.0) || !std::isfinite(v))
                throw SpecInvariantViolation(what + ": negative or non-finite entry in row " +
                                             std::to_string(r));
            s += v;
        }
        if (std::abs(s - 1.0) > kStochasticTol)
            throw SpecInvariantViolation(what + ": row " + std::to_string(r) +
                                         " sums to " + std::to_string(s));
    }
}

void check_nonpositive(const DenseMat& m, const std::string& what) {
    for (double v : m.a)
        if (!(v <= 0.0) || !std::isfinite(v))
            throw SpecInvariantViolation(what + ": entries must be finite and <= 0");
}

}  // namespace

void PomdpModel::validate() const {
    const std::size_t S = num_states();
    const std::size_t M = num_maint();
    const std::size_t O = num_obs_actions();
    if (S == 0) throw SpecInvariantViolation("model has no states");
    if (M == 0) throw SpecInvariantViolation("model has no maintenance actions");
    if (O == 0) throw SpecInvariantViolation("model has no observation actions");
    if (!(discount > 0.0 && discount < 1.0))
        throw SpecInvariantViolation("discount must lie in (0, 1)");
    if (transition.size() != M)
        throw SpecInvariantViolation("transition count != maintenance action count");
    for (std::size_t a = 0; a < M; ++a) {
        if (transition[a].rows() != S || transition[a].cols() != S)
            throw SpecInvariantViolation("transition " + std::to_string(a) + " has wrong shape");
        double err, mn;
        transition[a].row_stats(&err, &mn);
        if (mn < 0.0)
            throw SpecInvariantViolation("transition " + std::to_string(a) +
                                         " has a negative entry");
        if (err > kStochasticTol)
            throw SpecInvariantViolation("transition " + std::to_string(a) +
                                         " rows must sum to 1 (max error " +
                                         std::to_string(err) + ")");
    }
    if (default_obs.rows != S || default_obs.cols == 0)
        throw SpecInvariantViolation("default observation model has wrong shape");
    check_stochastic_dense(default_obs, "default observation model");
    if (obs_model.size() != O)
        throw SpecInvariantViolation("observation model count != observation action count");
    for (std::size_t a = 0; a < O; ++a) {
        if (obs_model[a].rows != S || obs_model[a].cols == 0)
            throw SpecInvariantViolation("observation model " + std::to_string(a) +
                                         " has wrong shape");
        check_stochastic_dense(obs_model[a], "observation model " + std::to_string(a));
    }
    if (reward_maint.rows != S || reward_maint.cols != M)
        throw SpecInvariantViolation("maintenance reward matrix has wrong shape");
    if (reward_obs.rows != S || reward_obs.cols != O)
        throw SpecInvariantViolation("observation reward matrix has wrong shape");
    if (reward_damage.size() != S)
        throw SpecInvariantViolation("damage reward vector has wrong length");
    check_nonpositive(reward_maint, "maintenance rewards");
    check_nonpositive(reward_obs, "observation rewards");
    for (double v : reward_damage)
        if (!(v <= 0.0) || !std::isfinite(v))
            throw SpecInvariantViolation("damage rewards: entries must be finite and <= 0");
    if (!allowed_mask.empty() && allowed_mask.size() != M * O)
        throw SpecInvariantViolation("allowed-pair mask has wrong size");
    bool any = false;
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t o = 0; o < O; ++o) any = any || allowed(m, o);
    if (!any) throw SpecInvariantViolation("no allowed action pair");
    // every maintenance action must be usable with some observation action
    for (std::size_t m = 0; m < M; ++m) {
        bool ok = false;
        for (std::size_t o = 0; o < O; ++o) ok = ok || allowed(m, o);
        if (!ok)
            throw SpecInvariantViolation("maintenance action " + std::to_string(m) +
                                         " has no allowed observation action");
    }
    if (initial_state >= S) throw SpecInvariantViolation("initial state out of range");
    if (!initial_belief_probs.empty()) {
        if (initial_belief_probs.size() != S)
            throw SpecInvariantViolation("initial belief length does not match state count");
        double sum = 0.0;
        for (double v : initial_belief_probs) {
            if (v < -kStochasticTol)
                throw SpecInvariantViolation("initial belief has a negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kStochasticTol)
            throw SpecInvariantViolation("initial belief does not sum to 1");
    }
}

}  // namespace voiplan
