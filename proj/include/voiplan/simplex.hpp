#pragma once
// Small dense two-phase primal simplex with Bland's rule, used for
// alpha-vector dominance pruning (witness-point LPs over the belief
// simplex). Problem sizes here are tiny (a handful of variables, up to a few
// hundred rows), so a plain dense tableau is appropriate.

#include <cstddef>
#include <vector>

namespace voiplan {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

// maximize c.x  subject to  A x = rhs,  x >= 0.
// A is row-major with `rows` rows and `cols` columns; rhs may have any sign.
LpResult simplex_max_eq(const std::vector<double>& a, std::size_t rows, std::size_t cols,
                        const std::vector<double>& rhs, const std::vector<double>& c);

}  // namespace voiplan
