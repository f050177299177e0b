#pragma once

#include <cstddef>
#include <vector>

namespace jca::kernels {

// Inner-loop kernel table. A scalar reference implementation always exists;
// AVX2 (x86-64) and NEON (aarch64) variants are compiled in where the target
// supports them and one is selected at runtime.
//
// Contract: every variant produces bit-identical results to the scalar
// reference. The gemm kernels accumulate over the shared dimension in
// ascending order for each output element and the SIMD variants vectorize
// only across output columns with separate multiply and add (no FMA), so the
// rounding sequence per element is the same everywhere. The project is built
// with -ffp-contract=off to keep the scalar path from fusing into FMA.
struct Kernels {
    const char* name;

    // c += a * b           a: m x k, b: k x n, c: m x n
    void (*gemm_nn)(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n);

    // c += a^T * b         a: k x m, b: k x n, c: m x n
    void (*gemm_tn)(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n);

    // out = a + b / out = a - b / out = a .* b   (entrywise, length n)
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);

    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    // out = alpha * x
    void (*scale)(double alpha, const double* x, double* out, std::size_t n);

    // out = max(x, 0); exactly +0.0 where x <= 0 (subgradient-at-zero rule)
    void (*relu)(const double* x, double* out, std::size_t n);

    // acc += g where x > 0
    void (*relu_bwd)(const double* x, const double* g, double* acc, std::size_t n);

    // acc += g * (1 - y^2)   with y = tanh(x) already computed
    void (*tanh_bwd)(const double* y, const double* g, double* acc, std::size_t n);
};

const Kernels& scalar();

#if defined(__x86_64__) || defined(_M_X64)
bool avx2_supported();
const Kernels& avx2();
#endif

#if defined(__ARM_NEON) || defined(__aarch64__)
const Kernels& neon();
#endif

// Active table: best available variant, overridable with JCA_KERNELS=
// {scalar|avx2|neon}. Resolved once per process.
const Kernels& active();

// Every variant usable on this machine (scalar first). For equivalence tests.
std::vector<const Kernels*> available();

}  // namespace jca::kernels
