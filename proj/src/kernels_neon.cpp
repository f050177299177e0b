#if defined(__ARM_NEON) || defined(__aarch64__)

#include <arm_neon.h>

#include "jca/kernels.hpp"

namespace jca::kernels {
namespace {

// 2-wide float64 lanes, same accumulation order and mul/add split as the
// scalar reference.

void gemm_nn_neon(const double* a, const double* b, double* c,
                  std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = a[i * k + l];
            const double* brow = b + l * n;
            const float64x2_t va = vdupq_n_f64(ail);
            std::size_t j = 0;
            for (; j + 2 <= n; j += 2) {
                float64x2_t vc = vld1q_f64(crow + j);
                vc = vaddq_f64(vc, vmulq_f64(va, vld1q_f64(brow + j)));
                vst1q_f64(crow + j, vc);
            }
            for (; j < n; ++j) crow[j] += ail * brow[j];
        }
    }
}

void gemm_tn_neon(const double* a, const double* b, double* c,
                  std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double ali = a[l * m + i];
            const double* brow = b + l * n;
            const float64x2_t va = vdupq_n_f64(ali);
            std::size_t j = 0;
            for (; j + 2 <= n; j += 2) {
                float64x2_t vc = vld1q_f64(crow + j);
                vc = vaddq_f64(vc, vmulq_f64(va, vld1q_f64(brow + j)));
                vst1q_f64(crow + j, vc);
            }
            for (; j < n; ++j) crow[j] += ali * brow[j];
        }
    }
}

void add_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vaddq_f64(vy, vmulq_f64(va, vld1q_f64(x + i)));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_neon(double alpha, const double* x, double* out, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(va, vld1q_f64(x + i)));
    for (; i < n; ++i) out[i] = alpha * x[i];
}

void relu_neon(const double* x, double* out, std::size_t n) {
    const float64x2_t vz = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmaxq_f64(vld1q_f64(x + i), vz));
    for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_neon(const double* x, const double* g, double* acc, std::size_t n) {
    const float64x2_t vz = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vx = vld1q_f64(x + i);
        float64x2_t vacc = vld1q_f64(acc + i);
        float64x2_t sum = vaddq_f64(vacc, vld1q_f64(g + i));
        uint64x2_t mask = vcgtq_f64(vx, vz);
        vst1q_f64(acc + i, vbslq_f64(mask, sum, vacc));
    }
    for (; i < n; ++i)
        if (x[i] > 0.0) acc[i] += g[i];
}

void tanh_bwd_neon(const double* y, const double* g, double* acc, std::size_t n) {
    const float64x2_t vone = vdupq_n_f64(1.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        float64x2_t d = vsubq_f64(vone, vmulq_f64(vy, vy));
        float64x2_t vacc = vld1q_f64(acc + i);
        vacc = vaddq_f64(vacc, vmulq_f64(vld1q_f64(g + i), d));
        vst1q_f64(acc + i, vacc);
    }
    for (; i < n; ++i) acc[i] += g[i] * (1.0 - y[i] * y[i]);
}

}  // namespace

const Kernels& neon() {
    static const Kernels k{
        "neon",     gemm_nn_neon, gemm_tn_neon, add_neon,
        sub_neon,   mul_neon,     axpy_neon,    scale_neon,
        relu_neon,  relu_bwd_neon, tanh_bwd_neon,
    };
    return k;
}

}  // namespace jca::kernels

#endif  // ARM NEON
