// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; it must only be entered after a runtime CPU check.

#include "voiplan/kernels.hpp"

#ifdef VOIPLAN_HAVE_AVX2

#include <immintrin.h>

#include <limits>

namespace voiplan::kern {
namespace {

inline double reduce_add(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

inline double reduce_min(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_min_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_min_sd(lo, swapped));
}

double v_dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i] * y[i];
    return reduce_add(acc) + tail;
}

void v_axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void v_hadamard(const double* x, const double* y, double* z, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(z + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) z[i] = x[i] * y[i];
}

void v_hadamard_acc(const double* x, const double* y, double* z, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vz = _mm256_loadu_pd(z + i);
        vz = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), vz);
        _mm256_storeu_pd(z + i, vz);
    }
    for (; i < n; ++i) z[i] += x[i] * y[i];
}

void v_matvec(const double* a, std::size_t rows, std::size_t cols,
              const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = v_dot(a + r * cols, x, cols);
}

void v_matvec_t(const double* a, std::size_t rows, std::size_t cols,
                const double* x, double* y) {
    for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) v_axpy(x[r], a + r * cols, y, cols);
}

double v_sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i];
    return reduce_add(acc) + tail;
}

void v_scale(double* x, double c, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vc));
    for (; i < n; ++i) x[i] *= c;
}

double v_min_ratio(const double* num, const double* den, std::size_t n) {
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    const __m256d zero = _mm256_setzero_pd();
    __m256d acc = inf;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vd = _mm256_loadu_pd(den + i);
        const __m256d vn = _mm256_loadu_pd(num + i);
        const __m256d mask = _mm256_cmp_pd(vd, zero, _CMP_GT_OQ);
        // Lanes with den <= 0 are replaced by +inf before the min-reduce;
        // this also removes NaNs produced by 0/0 in masked-out lanes.
        const __m256d ratio = _mm256_blendv_pd(inf, _mm256_div_pd(vn, vd), mask);
        acc = _mm256_min_pd(acc, ratio);
    }
    double best = reduce_min(acc);
    for (; i < n; ++i) {
        if (den[i] > 0.0) {
            const double r = num[i] / den[i];
            if (r < best) best = r;
        }
    }
    return best;
}

}  // namespace

const Ops* avx2_ops() {
    static const Ops ops = {
        "avx2",   v_dot,  v_axpy, v_hadamard, v_hadamard_acc,
        v_matvec, v_matvec_t, v_sum, v_scale, v_min_ratio,
    };
    return &ops;
}

}  // namespace voiplan::kern

#else  // !VOIPLAN_HAVE_AVX2

namespace voiplan::kern {
const Ops* avx2_ops() { return nullptr; }
}  // namespace voiplan::kern

#endif
