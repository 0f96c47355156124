// AVX2/FMA variants of the arithmetic kernels. Compiled with -mavx2 -mfma;
// only reached after a runtime cpuid check (see dispatch.cpp).

#include "pcgseg/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace pcgseg::kern {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_v(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_v(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_v(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = a * x[i];
}

void hadamard_v(const double* x, const double* y, double* z, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(z + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) z[i] = x[i] * y[i];
}

void gemv_v(const double* a, const double* x, const double* b, double* y,
            std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = (b ? b[r] : 0.0) + dot_v(a + r * cols, x, cols);
}

void gemv_t_acc_v(const double* a, const double* x, double* y,
                  std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_v(x[r], a + r * cols, y, cols);
}

void ger_acc_v(double* a, const double* x, const double* y,
               std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_v(x[r], y, a + r * cols, cols);
}

const Kernels kAvx2 = {
    dot_v, axpy_v, scale_v, hadamard_v, gemv_v, gemv_t_acc_v, ger_acc_v, "avx2",
};

} // namespace

const Kernels* avx2_impl_() { return &kAvx2; }

} // namespace pcgseg::kern

#else

namespace pcgseg::kern {
const Kernels* avx2_impl_() { return nullptr; }
} // namespace pcgseg::kern

#endif
