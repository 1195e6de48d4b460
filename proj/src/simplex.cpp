#include "voiplan/simplex.hpp"

#include <cmath>
#include <limits>

namespace voiplan {

namespace {
constexpr double kPivotTol = 1e-11;

// One simplex run on an existing tableau. `t` is (rows+1) x width row-major:
// rows constraint rows then the objective row (maximization, objective row
// holds reduced costs as -c after canonicalization, RHS in the last column).
// `basis` holds the basic variable of each constraint row. `allowed` marks
// columns permitted to enter. Bland's rule (lowest eligible index) prevents
// cycling. Returns false on unboundedness.
bool run_simplex(std::vector<double>& t, std::size_t rows, std::size_t width,
                 std::vector<std::size_t>& basis, const std::vector<char>& allowed) {
    const std::size_t obj = rows;          // objective row index
    const std::size_t rhs = width - 1;     // RHS column index
    for (;;) {
        // entering column: lowest index with positive reduced profit
        std::size_t enter = width;
        for (std::size_t j = 0; j + 1 < width; ++j) {
            if (!allowed[j]) continue;
            if (t[obj * width + j] > kPivotTol) {
                enter = j;
                break;
            }
        }
        if (enter == width) return true;  // optimal
        // leaving row: min ratio, ties by lowest basis index (Bland)
        std::size_t leave = rows;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rows; ++i) {
            const double aij = t[i * width + enter];
            if (aij > kPivotTol) {
                const double ratio = t[i * width + rhs] / aij;
                if (ratio < best_ratio - kPivotTol ||
                    (ratio < best_ratio + kPivotTol &&
                     (leave == rows || basis[i] < basis[leave]))) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
        }
        if (leave == rows) return false;  // unbounded
        // pivot
        const double piv = t[leave * width + enter];
        for (std::size_t j = 0; j < width; ++j) t[leave * width + j] /= piv;
        for (std::size_t i = 0; i <= rows; ++i) {
            if (i == leave) continue;
            const double f = t[i * width + enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width; ++j)
                t[i * width + j] -= f * t[leave * width + j];
        }
        basis[leave] = enter;
    }
}

}  // namespace

LpResult simplex_max_eq(const std::vector<double>& a, std::size_t rows, std::size_t cols,
                        const std::vector<double>& rhs, const std::vector<double>& c) {
    LpResult res;
    // tableau columns: structural | artificial | RHS
    const std::size_t width = cols + rows + 1;
    std::vector<double> t((rows + 1) * width, 0.0);
    std::vector<std::size_t> basis(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const double sign = rhs[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < cols; ++j) t[i * width + j] = sign * a[i * cols + j];
        t[i * width + cols + i] = 1.0;
        t[i * width + width - 1] = sign * rhs[i];
        basis[i] = cols + i;
    }

    // Phase 1: maximize -(sum of artificials); canonicalize by adding each
    // constraint row into the objective row.
    std::vector<char> allowed(width - 1, 1);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < width; ++j) t[rows * width + j] += t[i * width + j];
    for (std::size_t i = 0; i < rows; ++i) t[rows * width + cols + i] = 0.0;
    if (!run_simplex(t, rows, width, basis, allowed)) {
        res.status = LpStatus::Infeasible;  // phase 1 cannot be unbounded
        return res;
    }
    if (t[rows * width + width - 1] > 1e-8) {
        res.status = LpStatus::Infeasible;
        return res;
    }
    // Drive any artificial still basic (at zero level) out of the basis when
    // possible; rows where it is impossible are redundant and harmless.
    for (std::size_t i = 0; i < rows; ++i) {
        if (basis[i] < cols) continue;
        for (std::size_t j = 0; j < cols; ++j) {
            if (std::abs(t[i * width + j]) > kPivotTol) {
                const double piv = t[i * width + j];
                for (std::size_t k = 0; k < width; ++k) t[i * width + k] /= piv;
                for (std::size_t r = 0; r <= rows; ++r) {
                    if (r == i) continue;
                    const double f = t[r * width + j];
                    if (f == 0.0) continue;
                    for (std::size_t k = 0; k < width; ++k)
                        t[r * width + k] -= f * t[i * width + k];
                }
                basis[i] = j;
                break;
            }
        }
    }

    // Phase 2: real objective; artificials barred from entering.
    for (std::size_t j = 0; j < width; ++j) t[rows * width + j] = 0.0;
    for (std::size_t j = 0; j < cols; ++j) t[rows * width + j] = c[j];
    // canonicalize: subtract c_B times each basic row
    for (std::size_t i = 0; i < rows; ++i) {
        if (basis[i] >= cols) continue;
        const double cb = c[basis[i]];
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j < width; ++j)
            t[rows * width + j] -= cb * t[i * width + j];
    }
    for (std::size_t j = cols; j + 1 < width; ++j) allowed[j] = 0;
    if (!run_simplex(t, rows, width, basis, allowed)) {
        res.status = LpStatus::Unbounded;
        return res;
    }

    res.status = LpStatus::Optimal;
    res.x.assign(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        if (basis[i] < cols) res.x[basis[i]] = t[i * width + width - 1];
    double obj = 0.0;
    for (std::size_t j = 0; j < cols; ++j) obj += c[j] * res.x[j];
    res.objective = obj;
    return res;
}

}  // namespace voiplan
