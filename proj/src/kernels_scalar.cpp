#include "voiplan/kernels.hpp"

#include <limits>

namespace voiplan::kern {
namespace {

double s_dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void s_axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_hadamard(const double* x, const double* y, double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

void s_hadamard_acc(const double* x, const double* y, double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] += x[i] * y[i];
}

void s_matvec(const double* a, std::size_t rows, std::size_t cols,
              const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = s_dot(a + r * cols, x, cols);
}

void s_matvec_t(const double* a, std::size_t rows, std::size_t cols,
                const double* x, double* y) {
    for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s_axpy(x[r], a + r * cols, y, cols);
}

double s_sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void s_scale(double* x, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= c;
}

double s_min_ratio(const double* num, const double* den, std::size_t n) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (den[i] > 0.0) {
            const double r = num[i] / den[i];
            if (r < best) best = r;
        }
    }
    return best;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar",  s_dot,  s_axpy, s_hadamard, s_hadamard_acc,
        s_matvec,  s_matvec_t, s_sum, s_scale, s_min_ratio,
    };
    return ops;
}

}  // namespace voiplan::kern
