#pragma once
// Dense numeric kernels used by the belief/value machinery.
//
// Two implementations exist: a portable scalar reference and an AVX2+FMA
// variant compiled in a separate translation unit. Selection happens once at
// startup: the VOIPLAN_KERNELS environment variable ("scalar", "avx2",
// "auto"; default auto) overrides CPU detection. Both variants implement the
// same contracts below; the test suite checks them against each other on
// randomized inputs.

#include <cstddef>
#include <string>

namespace voiplan::kern {

struct Ops {
    const char* name;

    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // z[i] = x[i] * y[i]
    void (*hadamard)(const double* x, const double* y, double* z, std::size_t n);
    // z[i] += x[i] * y[i]
    void (*hadamard_acc)(const double* x, const double* y, double* z, std::size_t n);
    // y = A x for row-major A (rows x cols), y has length rows
    void (*matvec)(const double* a, std::size_t rows, std::size_t cols,
                   const double* x, double* y);
    // y = A^T x for row-major A (rows x cols), y has length cols
    void (*matvec_t)(const double* a, std::size_t rows, std::size_t cols,
                     const double* x, double* y);
    // sum_i x[i]
    double (*sum)(const double* x, std::size_t n);
    // x[i] *= c
    void (*scale)(double* x, double c, std::size_t n);
    // min over i with den[i] > 0 of num[i]/den[i]; +infinity if no such i
    double (*min_ratio)(const double* num, const double* den, std::size_t n);
};

// Portable reference implementation. Always available.
const Ops& scalar_ops();

// AVX2+FMA implementation, or nullptr when not compiled in.
const Ops* avx2_ops();

// The implementation selected for this process (env override, then CPU
// detection). Throws std::runtime_error if VOIPLAN_KERNELS requests an
// unavailable variant.
const Ops& active();

// True when the running CPU supports the AVX2+FMA variant.
bool cpu_supports_avx2();

}  // namespace voiplan::kern
