#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "jca/kernels.hpp"

namespace jca::kernels {
namespace {

// 4-wide over output columns; separate mul/add (no FMA) and scalar tails
// identical to the reference, so results match the scalar kernels bit for
// bit.

void gemm_nn_avx2(const double* a, const double* b, double* c,
                  std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = a[i * k + l];
            const double* brow = b + l * n;
            const __m256d va = _mm256_set1_pd(ail);
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d vc = _mm256_loadu_pd(crow + j);
                __m256d vb = _mm256_loadu_pd(brow + j);
                vc = _mm256_add_pd(vc, _mm256_mul_pd(va, vb));
                _mm256_storeu_pd(crow + j, vc);
            }
            for (; j < n; ++j) crow[j] += ail * brow[j];
        }
    }
}

void gemm_tn_avx2(const double* a, const double* b, double* c,
                  std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double ali = a[l * m + i];
            const double* brow = b + l * n;
            const __m256d va = _mm256_set1_pd(ali);
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d vc = _mm256_loadu_pd(crow + j);
                __m256d vb = _mm256_loadu_pd(brow + j);
                vc = _mm256_add_pd(vc, _mm256_mul_pd(va, vb));
                _mm256_storeu_pd(crow + j, vc);
            }
            for (; j < n; ++j) crow[j] += ali * brow[j];
        }
    }
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double alpha, const double* x, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = alpha * x[i];
}

void relu_avx2(const double* x, double* out, std::size_t n) {
    const __m256d vz = _mm256_setzero_pd();
    std::size_t i = 0;
    // max(x, +0.0) sends -0.0 to +0.0, same as the scalar x > 0 test.
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(x + i), vz));
    for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_avx2(const double* x, const double* g, double* acc, std::size_t n) {
    const __m256d vz = _mm256_setzero_pd();
    std::size_t i = 0;
    // Blend keeps inactive lanes bit-untouched (adding 0.0 would not).
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vacc = _mm256_loadu_pd(acc + i);
        __m256d sum = _mm256_add_pd(vacc, _mm256_loadu_pd(g + i));
        __m256d mask = _mm256_cmp_pd(vx, vz, _CMP_GT_OQ);
        _mm256_storeu_pd(acc + i, _mm256_blendv_pd(vacc, sum, mask));
    }
    for (; i < n; ++i)
        if (x[i] > 0.0) acc[i] += g[i];
}

void tanh_bwd_avx2(const double* y, const double* g, double* acc, std::size_t n) {
    const __m256d vone = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d d = _mm256_sub_pd(vone, _mm256_mul_pd(vy, vy));
        __m256d vacc = _mm256_loadu_pd(acc + i);
        vacc = _mm256_add_pd(vacc, _mm256_mul_pd(_mm256_loadu_pd(g + i), d));
        _mm256_storeu_pd(acc + i, vacc);
    }
    for (; i < n; ++i) acc[i] += g[i] * (1.0 - y[i] * y[i]);
}

}  // namespace

bool avx2_supported() { return __builtin_cpu_supports("avx2"); }

const Kernels& avx2() {
    static const Kernels k{
        "avx2",     gemm_nn_avx2, gemm_tn_avx2, add_avx2,
        sub_avx2,   mul_avx2,     axpy_avx2,    scale_avx2,
        relu_avx2,  relu_bwd_avx2, tanh_bwd_avx2,
    };
    return k;
}

}  // namespace jca::kernels

#endif  // x86-64
