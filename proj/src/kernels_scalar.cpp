#include "jca/kernels.hpp"

namespace jca::kernels {
namespace {

// Reference kernels. Loop order (i, l, j) in the gemms is the accumulation
// contract the SIMD variants reproduce.

void gemm_nn_scalar(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = a[i * k + l];
            const double* brow = b + l * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += ail * brow[j];
        }
    }
}

void gemm_tn_scalar(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double ali = a[l * m + i];
            const double* brow = b + l * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += ali * brow[j];
        }
    }
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

void relu_scalar(const double* x, double* out, std::size_t n) {
    // x > 0 (not >=) so -0.0 maps to +0.0, matching the vector max.
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_scalar(const double* x, const double* g, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] > 0.0) acc[i] += g[i];
}

void tanh_bwd_scalar(const double* y, const double* g, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += g[i] * (1.0 - y[i] * y[i]);
}

}  // namespace

const Kernels& scalar() {
    static const Kernels k{
        "scalar",     gemm_nn_scalar, gemm_tn_scalar, add_scalar,
        sub_scalar,   mul_scalar,     axpy_scalar,    scale_scalar,
        relu_scalar,  relu_bwd_scalar, tanh_bwd_scalar,
    };
    return k;
}

}  // namespace jca::kernels
