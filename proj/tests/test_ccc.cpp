#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "jca/ccc.hpp"
#include "jca/errors.hpp"
#include "jca/gradcheck.hpp"
#include "jca/rng.hpp"

using namespace jca;

namespace {

std::vector<double> random_track(std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    Rng rng(seed);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

}  // namespace

TEST_CASE("ccc of a track with itself is exactly 1") {
    const std::vector<double> x{1.0, 2.0, 3.0};
    const auto r = ccc(x, x);
    CHECK(r.rho_c == 1.0);
    CHECK(!r.degenerate);
}

TEST_CASE("mirrored track gives exactly -1") {
    // x=[1,2,3], y=[3,2,1]: equal means (2), equal variance (2/3),
    // covariance -2/3, so rho = 2*(-2/3)/(4/3) = -1.
    const std::vector<double> x{1.0, 2.0, 3.0};
    const std::vector<double> y{3.0, 2.0, 1.0};
    const auto r = ccc(x, y);
    CHECK(r.rho_c == -1.0);
    CHECK(r.mu_x == 2.0);
    CHECK(r.mu_y == 2.0);
    CHECK(r.var_x == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.cov_xy == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("constant prediction against varying truth scores 0 via zero covariance") {
    const std::vector<double> x{2.0, 2.0, 2.0};
    const std::vector<double> y{1.0, 2.0, 3.0};
    const auto r = ccc(x, y);
    CHECK(r.rho_c == 0.0);
    CHECK(!r.degenerate);
}

TEST_CASE("both tracks constant with equal means is the degenerate case") {
    const std::vector<double> x{5.0, 5.0, 5.0};
    const auto r = ccc(x, x);
    CHECK(r.degenerate);
    CHECK(r.rho_c == 0.0);
}

TEST_CASE("ccc rejects mismatched or too-short tracks") {
    const std::vector<double> a{1.0, 2.0};
    const std::vector<double> b{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(ccc(a, b), AlignError);
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(ccc(one, one), AlignError);
}

TEST_CASE("report components reconstruct rho to 1e-12") {
    const auto x = random_track(64, 1001);
    const auto y = random_track(64, 1002);
    const auto r = ccc(x, y);
    const double dmu = r.mu_x - r.mu_y;
    const double rebuilt = 2.0 * r.cov_xy / (r.var_x + r.var_y + dmu * dmu);
    CHECK(std::abs(rebuilt - r.rho_c) < 1e-12);
}

TEST_CASE("fuzzed identities: symmetry, bound, self-agreement") {
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + trial % 37;
        const auto x = random_track(n, 2000 + trial);
        const auto y = random_track(n, 9000 + trial);
        const auto xy = ccc(x, y);
        const auto yx = ccc(y, x);
        CHECK(xy.rho_c == yx.rho_c);
        CHECK(std::abs(xy.rho_c) <= 1.0);
        CHECK(ccc(x, x).rho_c == 1.0);
    }
}

TEST_CASE("shift penalty is strict and grows with the offset") {
    const auto x = random_track(50, 3003);
    double prev = 1.0;
    for (double b : {0.1, 0.5, 1.0, 2.0}) {
        std::vector<double> shifted(x);
        for (auto& v : shifted) v += b;
        const double rho = ccc(x, shifted).rho_c;
        CHECK(rho < 1.0);
        CHECK(rho < prev);
        prev = rho;
    }
}

TEST_CASE("ccc_loss is zero for perfect predictions") {
    Mat gt(4, 2, {0.1, -0.2, 0.4, 0.3, -0.5, 0.2, 0.7, -0.1});
    Graph g;
    NodeId pred = g.leaf(gt, true);
    auto res = ccc_loss(g, pred, gt);
    CHECK(g.value(res.loss)[0] == 0.0);
    CHECK(res.rho_valence == 1.0);
    CHECK(res.rho_arousal == 1.0);
}

TEST_CASE("mirror about the mean costs the full loss of 2") {
    Mat gt(8, 2);
    Rng rng(44);
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = rng.uniform(-1.0, 1.0);
    double mu[2] = {0.0, 0.0};
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t r = 0; r < 8; ++r) mu[c] += gt(r, c);
        mu[c] /= 8.0;
    }
    Mat pred(8, 2);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t r = 0; r < 8; ++r) pred(r, c) = -gt(r, c) + 2.0 * mu[c];

    Graph g;
    auto res = ccc_loss(g, g.leaf(pred, true), gt);
    CHECK(g.value(res.loss)[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(res.rho_valence == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("loss gradient matches finite differences on random 16x2 input") {
    Mat gt(16, 2);
    Mat pred(16, 2);
    Rng rng(55);
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = rng.uniform(-1.0, 1.0);

    auto eval = [&]() {
        Graph g;
        auto res = ccc_loss(g, g.leaf(pred, true), gt);
        return g.value(res.loss)[0];
    };

    Graph g;
    NodeId leaf = g.leaf(pred, true);
    auto res = ccc_loss(g, leaf, gt);
    g.backward(res.loss);

    std::vector<std::pair<std::string, Mat*>> params{{"pred", &pred}};
    std::vector<Mat> analytic{g.grad(leaf)};
    const auto report = finite_diff_check(eval, params, analytic, 1e-5);
    CHECK(report.max_rel_err < 1e-4);

    bool any_nonzero = false;
    for (std::size_t i = 0; i < analytic[0].size(); ++i)
        if (analytic[0][i] != 0.0) any_nonzero = true;
    CHECK(any_nonzero);
}

TEST_CASE("degenerate target contributes a constant loss of 1 with its flag") {
    Mat gt(4, 2);
    Mat pred(4, 2);
    for (std::size_t r = 0; r < 4; ++r) {
        gt(r, 0) = 0.25;    // constant valence target
        pred(r, 0) = 0.25;  // constant equal-mean prediction: degenerate
        gt(r, 1) = 0.1 * static_cast<double>(r);
        pred(r, 1) = 0.1 * static_cast<double>(r);  // perfect arousal
    }
    Graph g;
    auto res = ccc_loss(g, g.leaf(pred, true), gt);
    CHECK(res.degenerate_valence);
    CHECK(!res.degenerate_arousal);
    // (1.0 + 0.0) / 2
    CHECK(g.value(res.loss)[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("loss and metric agree on the same inputs") {
    Mat gt(12, 2);
    Mat pred(12, 2);
    Rng rng(66);
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = rng.uniform(-1.0, 1.0);
    Graph g;
    auto res = ccc_loss(g, g.leaf(pred, true), gt);
    CHECK(g.value(res.loss)[0] ==
          doctest::Approx(ccc_loss_value(pred, gt)).epsilon(1e-12));
}
