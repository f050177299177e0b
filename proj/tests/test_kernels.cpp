#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <vector>

#include "jca/kernels.hpp"
#include "jca/rng.hpp"

using namespace jca;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double lo = -1.0,
                               double hi = 1.0) {
    std::vector<double> v(n);
    Rng rng(seed);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("active kernel table is one of the available variants") {
    const auto variants = kernels::available();
    REQUIRE(!variants.empty());
    CHECK(variants[0]->name == std::string("scalar"));
    bool found = false;
    for (const auto* k : variants)
        if (k->name == std::string(kernels::active().name)) found = true;
    CHECK(found);
}

TEST_CASE("SIMD variants match the scalar reference bit for bit") {
    const auto variants = kernels::available();
    const auto& ref = kernels::scalar();

    // Sizes straddle the vector width to exercise the tail loops.
    const std::size_t gemm_shapes[][3] = {
        {1, 1, 1}, {3, 5, 7}, {4, 4, 4}, {8, 3, 9}, {5, 17, 13}, {16, 16, 16},
    };

    for (const auto* kp : variants) {
        if (kp == &ref) continue;
        const auto& k = *kp;
        CAPTURE(k.name);

        for (const auto& sh : gemm_shapes) {
            const std::size_t m = sh[0], kk = sh[1], n = sh[2];
            auto a = random_vec(m * kk, 11 * m + n);
            auto b = random_vec(kk * n, 13 * m + n);
            auto c0 = random_vec(m * n, 17 * m + n);
            auto c1 = c0;
            ref.gemm_nn(a.data(), b.data(), c0.data(), m, kk, n);
            k.gemm_nn(a.data(), b.data(), c1.data(), m, kk, n);
            CHECK(bit_equal(c0, c1));

            auto at = random_vec(kk * m, 19 * m + n);
            auto d0 = random_vec(m * n, 23 * m + n);
            auto d1 = d0;
            ref.gemm_tn(at.data(), b.data(), d0.data(), m, kk, n);
            k.gemm_tn(at.data(), b.data(), d1.data(), m, kk, n);
            CHECK(bit_equal(d0, d1));
        }

        for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 31u, 64u, 100u}) {
            auto a = random_vec(n, 29 + n);
            auto b = random_vec(n, 31 + n);
            std::vector<double> o0(n), o1(n);

            ref.add(a.data(), b.data(), o0.data(), n);
            k.add(a.data(), b.data(), o1.data(), n);
            CHECK(bit_equal(o0, o1));

            ref.sub(a.data(), b.data(), o0.data(), n);
            k.sub(a.data(), b.data(), o1.data(), n);
            CHECK(bit_equal(o0, o1));

            ref.mul(a.data(), b.data(), o0.data(), n);
            k.mul(a.data(), b.data(), o1.data(), n);
            CHECK(bit_equal(o0, o1));

            auto y0 = random_vec(n, 37 + n);
            auto y1 = y0;
            ref.axpy(0.73, a.data(), y0.data(), n);
            k.axpy(0.73, a.data(), y1.data(), n);
            CHECK(bit_equal(y0, y1));

            ref.scale(-1.37, a.data(), o0.data(), n);
            k.scale(-1.37, a.data(), o1.data(), n);
            CHECK(bit_equal(o0, o1));

            ref.relu(a.data(), o0.data(), n);
            k.relu(a.data(), o1.data(), n);
            CHECK(bit_equal(o0, o1));

            auto acc0 = random_vec(n, 41 + n);
            auto acc1 = acc0;
            ref.relu_bwd(a.data(), b.data(), acc0.data(), n);
            k.relu_bwd(a.data(), b.data(), acc1.data(), n);
            CHECK(bit_equal(acc0, acc1));

            auto t = random_vec(n, 43 + n, -0.99, 0.99);
            acc0 = random_vec(n, 47 + n);
            acc1 = acc0;
            ref.tanh_bwd(t.data(), b.data(), acc0.data(), n);
            k.tanh_bwd(t.data(), b.data(), acc1.data(), n);
            CHECK(bit_equal(acc0, acc1));
        }
    }
}

TEST_CASE("relu maps negative zero and negatives to +0.0 in every variant") {
    const double in[5] = {-0.0, 0.0, -1.5, 2.5, -1e-300};
    for (const auto* kp : kernels::available()) {
        double out[5];
        kp->relu(in, out, 5);
        for (int i = 0; i < 5; ++i) {
            if (in[i] > 0.0) {
                CHECK(out[i] == in[i]);
            } else {
                CHECK(out[i] == 0.0);
                CHECK(!std::signbit(out[i]));
            }
        }
    }
}

TEST_CASE("gemm_nn computes plain matrix products") {
    // [[1,2],[3,4]] * [[0],[1]] = [[2],[4]]
    const double a[4] = {1, 2, 3, 4};
    const double b[2] = {0, 1};
    for (const auto* kp : kernels::available()) {
        double c[2] = {0, 0};
        kp->gemm_nn(a, b, c, 2, 2, 1);
        CHECK(c[0] == 2.0);
        CHECK(c[1] == 4.0);
    }
}

TEST_CASE("gemm_tn equals transpose-then-multiply") {
    auto a = random_vec(3 * 4, 101);  // A stored 3x4; A^T is 4x3
    auto b = random_vec(3 * 5, 103);  // 3x5
    std::vector<double> c(4 * 5, 0.0);
    kernels::scalar().gemm_tn(a.data(), b.data(), c.data(), 4, 3, 5);

    // Reference: explicit transpose then gemm_nn.
    std::vector<double> at(4 * 3);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t col = 0; col < 4; ++col) at[col * 3 + r] = a[r * 4 + col];
    std::vector<double> c2(4 * 5, 0.0);
    kernels::scalar().gemm_nn(at.data(), b.data(), c2.data(), 4, 3, 5);

    for (std::size_t i = 0; i < c.size(); ++i)
        CHECK(c[i] == doctest::Approx(c2[i]).epsilon(1e-14));
}
