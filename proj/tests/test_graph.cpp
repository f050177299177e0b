#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "jca/errors.hpp"
#include "jca/gradcheck.hpp"
#include "jca/graph.hpp"
#include "jca/rng.hpp"

using namespace jca;

namespace {

Mat random_mat(std::size_t r, std::size_t c, std::uint64_t seed, double lo = -1.0,
               double hi = 1.0) {
    Mat m(r, c);
    Rng rng(seed);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(lo, hi);
    return m;
}

// Runs the checker against a scalar graph rebuilt from `params` by `build`.
double check_graph(std::vector<std::pair<std::string, Mat>>& storage,
                   const std::function<NodeId(Graph&, const std::vector<NodeId>&)>& build) {
    auto eval = [&]() {
        Graph g;
        std::vector<NodeId> leaves;
        for (auto& [name, value] : storage) leaves.push_back(g.leaf(value, true));
        return g.value(build(g, leaves))[0];
    };

    Graph g;
    std::vector<NodeId> leaves;
    for (auto& [name, value] : storage) leaves.push_back(g.leaf(value, true));
    NodeId loss = build(g, leaves);
    g.backward(loss);

    std::vector<Mat> analytic;
    std::vector<std::pair<std::string, Mat*>> params;
    for (std::size_t i = 0; i < storage.size(); ++i) {
        analytic.push_back(g.grad(leaves[i]));
        params.emplace_back(storage[i].first, &storage[i].second);
    }
    return finite_diff_check(eval, params, analytic, 1e-5).max_rel_err;
}

}  // namespace

TEST_CASE("matmul values: identity and hand arithmetic") {
    Graph g;
    Mat m = random_mat(2, 2, 7);
    NodeId r = g.matmul(g.leaf(Mat::identity(2)), g.leaf(m));
    CHECK(g.value(r) == m);

    NodeId p = g.matmul(g.leaf(Mat(2, 2, {1, 2, 3, 4})), g.leaf(Mat(2, 1, {0, 1})));
    CHECK(g.value(p)(0, 0) == 2.0);
    CHECK(g.value(p)(1, 0) == 4.0);
}

TEST_CASE("matmul rejects mismatched shapes naming both") {
    Graph g;
    NodeId a = g.leaf(Mat(2, 3));
    NodeId b = g.leaf(Mat(2, 3));
    CHECK_THROWS_WITH_AS(g.matmul(a, b), doctest::Contains("2x3"), DimError);
}

TEST_CASE("matmul backward matches finite differences") {
    std::vector<std::pair<std::string, Mat>> storage{
        {"a", random_mat(3, 4, 21)}, {"b", random_mat(4, 2, 22)}};
    double err = check_graph(storage, [](Graph& g, const std::vector<NodeId>& v) {
        return g.sum_all(g.tanh(g.matmul(v[0], v[1])));
    });
    CHECK(err < 1e-6);
}

TEST_CASE("elementwise values") {
    Graph g;
    NodeId t = g.tanh(g.leaf(Mat::zeros(2, 2)));
    for (std::size_t i = 0; i < 4; ++i) CHECK(g.value(t)[i] == 0.0);

    NodeId r = g.relu(g.leaf(Mat(1, 2, {-1.0, 2.0})));
    CHECK(g.value(r)[0] == 0.0);
    CHECK(g.value(r)[1] == 2.0);

    // Strict (-1,1) holds while tanh is representable below 1; huge inputs
    // round to exactly +-1.0 in doubles, so the closed bound is the FP truth.
    Mat mid = random_mat(5, 5, 33, -5.0, 5.0);
    NodeId tm = g.tanh(g.leaf(mid));
    for (std::size_t i = 0; i < 25; ++i) {
        CHECK(g.value(tm)[i] > -1.0);
        CHECK(g.value(tm)[i] < 1.0);
    }
    Mat big = random_mat(5, 5, 34, -1e6, 1e6);
    NodeId tb = g.tanh(g.leaf(big));
    for (std::size_t i = 0; i < 25; ++i) CHECK(std::abs(g.value(tb)[i]) <= 1.0);
}

TEST_CASE("tanh gradient at zero is one") {
    Mat x = Mat::zeros(2, 3);
    Graph g;
    NodeId leaf = g.leaf(x, true);
    g.backward(g.sum_all(g.tanh(leaf)));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(g.grad(leaf)[i] == 1.0);
}

TEST_CASE("sum gradient is all ones") {
    Mat x = random_mat(3, 3, 5);
    Graph g;
    NodeId leaf = g.leaf(x, true);
    g.backward(g.sum_all(leaf));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(g.grad(leaf)[i] == 1.0);
}

TEST_CASE("concat_cols round trip and shape") {
    Graph g;
    Mat a = random_mat(4, 6, 51);
    Mat b = random_mat(4, 6, 52);
    NodeId cat = g.concat_cols(g.leaf(a), g.leaf(b));
    CHECK(g.value(cat).rows() == 4);
    CHECK(g.value(cat).cols() == 12);
    CHECK(g.value(g.slice_cols(cat, 0, 6)) == a);
    CHECK(g.value(g.slice_cols(cat, 6, 12)) == b);

    NodeId short_rows = g.leaf(Mat(3, 6));
    NodeId full = g.leaf(a);
    CHECK_THROWS_AS(g.concat_cols(full, short_rows), DimError);
}

TEST_CASE("gradient flows through concat the same as through the slices") {
    std::vector<std::pair<std::string, Mat>> storage{
        {"a", random_mat(3, 2, 61)}, {"b", random_mat(3, 4, 62)}};
    double err = check_graph(storage, [](Graph& g, const std::vector<NodeId>& v) {
        NodeId cat = g.concat_cols(v[0], v[1]);
        return g.sum_all(g.hadamard(g.tanh(cat), cat));
    });
    CHECK(err < 1e-6);
}

TEST_CASE("add and transpose identities") {
    Graph g;
    Mat a = random_mat(3, 4, 71);
    NodeId an = g.leaf(a, true);
    CHECK(g.value(g.add(an, g.leaf(Mat::zeros(3, 4)))) == a);
    CHECK(g.value(g.transpose(g.transpose(an))) == a);

    NodeId sum = g.add(an, g.leaf(random_mat(3, 4, 72), false));
    g.backward(g.sum_all(sum));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(g.grad(an)[i] == 1.0);

    Graph g2;
    CHECK_THROWS_AS(g2.add(g2.leaf(Mat(2, 2)), g2.leaf(Mat(2, 3))), DimError);
}

TEST_CASE("composite graph of every op passes the finite-difference oracle") {
    std::vector<std::pair<std::string, Mat>> storage{
        {"w1", random_mat(4, 5, 81)},
        {"w2", random_mat(5, 3, 82)},
        {"row", random_mat(1, 3, 83)},
        {"x", random_mat(6, 4, 84)}};
    double err = check_graph(storage, [](Graph& g, const std::vector<NodeId>& v) {
        NodeId h = g.relu(g.matmul(v[3], v[0]));
        NodeId y = g.add_rowvec(g.matmul(h, v[1]), v[2]);
        NodeId t = g.tanh(g.scale_const(y, 0.7));
        NodeId c = g.concat_cols(t, g.transpose(g.matmul(v[1], g.transpose(t))));
        NodeId mixed = g.sub(g.hadamard(c, c), g.add_const(c, -0.25));
        NodeId s = g.sum_all(g.concat_rows(mixed, mixed));
        NodeId denom = g.add_const(g.hadamard(s, s), 3.0);
        return g.div(s, denom);
    });
    CHECK(err < 1e-4);
}

TEST_CASE("relu subgradient at exactly zero is zero") {
    Mat x(1, 3, {-1.0, 0.0, 2.0});
    Graph g;
    NodeId leaf = g.leaf(x, true);
    g.backward(g.sum_all(g.relu(leaf)));
    CHECK(g.grad(leaf)[0] == 0.0);
    CHECK(g.grad(leaf)[1] == 0.0);
    CHECK(g.grad(leaf)[2] == 1.0);
}

TEST_CASE("finite_diff_check trivial oracle: f = sum(x)") {
    Mat x = random_mat(3, 3, 91);
    std::vector<std::pair<std::string, Mat*>> params{{"x", &x}};
    std::vector<Mat> analytic{Mat::full(3, 3, 1.0)};
    auto eval = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i];
        return s;
    };
    auto report = finite_diff_check(eval, params, analytic, 1e-5);
    CHECK(report.max_rel_err < 1e-9);
    CHECK(report.entries_checked == 9);
}

TEST_CASE("finite_diff_check rejects bad h and non-finite objectives") {
    Mat x(1, 1, {0.5});
    std::vector<std::pair<std::string, Mat*>> params{{"x", &x}};
    std::vector<Mat> analytic{Mat(1, 1)};
    CHECK_THROWS_AS(finite_diff_check([] { return 0.0; }, params, analytic, 0.0),
                    ConfigError);
    CHECK_THROWS_AS(finite_diff_check([] { return std::nan(""); }, params, analytic,
                                      1e-5),
                    EvalError);
}

TEST_CASE("backward requires a finite 1x1 loss") {
    Graph g;
    NodeId a = g.leaf(random_mat(2, 2, 95), true);
    CHECK_THROWS_AS(g.backward(a), DimError);

    Graph g2;
    NodeId inf = g2.leaf(Mat(1, 1, {std::numeric_limits<double>::infinity()}), true);
    CHECK_THROWS_AS(g2.backward(inf), EvalError);
}

TEST_CASE("gradients accumulate when a node feeds two consumers") {
    Mat x(1, 1, {0.3});
    Graph g;
    NodeId leaf = g.leaf(x, true);
    // f = x*x + x  -> df/dx = 2x + 1
    NodeId f = g.add(g.hadamard(leaf, leaf), leaf);
    g.backward(g.sum_all(f));
    CHECK(g.grad(leaf)[0] == doctest::Approx(2 * 0.3 + 1).epsilon(1e-12));
}
