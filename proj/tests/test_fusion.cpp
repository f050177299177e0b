#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "jca/ccc.hpp"
#include "jca/errors.hpp"
#include "jca/fusion.hpp"
#include "jca/gradcheck.hpp"
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

bool bit_equal(const Mat& a, const Mat& b) {
    return a.same_shape(b) &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void zero_param(FusionModel& m, std::string_view name) {
    Mat* p = m.find_param(name);
    REQUIRE(p != nullptr);
    *p = Mat::zeros(p->rows(), p->cols());
}

void zero_attention(FusionModel& m) {
    for (const char* name : {"W_a", "W_v", "W_ca", "W_cv", "W_ha", "W_hv"})
        zero_param(m, name);
}

}  // namespace

TEST_CASE("joint correlation: zero weights give a zero matrix, shapes line up") {
    const std::size_t L = 4, d_a = 6, d = 12;
    Graph g;
    NodeId X = g.leaf(random_mat(L, d_a, 1));
    NodeId J = g.leaf(random_mat(L, d, 2));
    NodeId W0 = g.leaf(Mat::zeros(L, L));
    NodeId C = joint_correlation(g, X, J, W0, d);
    CHECK(g.value(C).rows() == d_a);
    CHECK(g.value(C).cols() == d);
    for (std::size_t i = 0; i < g.value(C).size(); ++i) CHECK(g.value(C)[i] == 0.0);
}

TEST_CASE("joint correlation stays bounded under huge weights") {
    const std::size_t L = 4, d_a = 6, d = 12;
    Graph g;
    NodeId X = g.leaf(random_mat(L, d_a, 3));
    NodeId J = g.leaf(random_mat(L, d, 4));
    NodeId W = g.leaf(random_mat(L, L, 5, -1e6, 1e6));
    NodeId C = joint_correlation(g, X, J, W, d);
    for (std::size_t i = 0; i < g.value(C).size(); ++i)
        CHECK(std::abs(g.value(C)[i]) <= 1.0);
}

TEST_CASE("attention maps: zero weights give zero, entries are nonnegative") {
    const std::size_t L = 4, d_a = 6, d = 12, k = 3;
    Graph g;
    NodeId X = g.leaf(random_mat(L, d_a, 6));
    NodeId C = g.leaf(random_mat(d_a, d, 7));
    NodeId H0 = attention_maps(g, X, C, g.leaf(Mat::zeros(k, L)),
                               g.leaf(Mat::zeros(k, d)));
    CHECK(g.value(H0).rows() == k);
    CHECK(g.value(H0).cols() == d_a);
    for (std::size_t i = 0; i < g.value(H0).size(); ++i) CHECK(g.value(H0)[i] == 0.0);

    NodeId Wm = g.leaf(random_mat(k, L, 8));
    NodeId Wc = g.leaf(random_mat(k, d, 9));
    NodeId H = attention_maps(g, X, C, Wm, Wc);
    for (std::size_t i = 0; i < g.value(H).size(); ++i) CHECK(g.value(H)[i] >= 0.0);
}

TEST_CASE("negating the attention weight matrices flips which entries survive relu") {
    const std::size_t L = 5, d_a = 4, d = 9, k = 3;
    Graph g;
    NodeId X = g.leaf(random_mat(L, d_a, 10));
    NodeId C = g.leaf(random_mat(d_a, d, 11));
    Mat wm = random_mat(k, L, 12);
    Mat wc = random_mat(k, d, 13);
    Mat wm_neg = wm, wc_neg = wc;
    for (std::size_t i = 0; i < wm_neg.size(); ++i) wm_neg[i] = -wm_neg[i];
    for (std::size_t i = 0; i < wc_neg.size(); ++i) wc_neg[i] = -wc_neg[i];

    const Mat h = g.value(attention_maps(g, X, C, g.leaf(wm), g.leaf(wc)));
    const Mat hn = g.value(attention_maps(g, X, C, g.leaf(wm_neg), g.leaf(wc_neg)));
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i] > 0.0) CHECK(hn[i] == 0.0);
        if (hn[i] > 0.0) CHECK(h[i] == 0.0);
    }
}

TEST_CASE("attended features reduce to the input when W_h is zero") {
    const std::size_t L = 4, d_a = 6, k = 3;
    Graph g;
    Mat x = random_mat(L, d_a, 14);
    NodeId X = g.leaf(x);
    NodeId H = g.leaf(random_mat(k, d_a, 15));
    NodeId out = attended_features(g, X, H, g.leaf(Mat::zeros(L, k)));
    CHECK(bit_equal(g.value(out), x));
}

TEST_CASE("jca forward shapes and attention outputs") {
    ModelDims dims{4, 6, 6, 3, 5};
    auto model = FusionModel::init(FusionVariant::jca, dims, 99);
    Mat xa = random_mat(4, 6, 16);
    Mat xv = random_mat(4, 6, 17);
    AttentionOutputs att;
    Mat pred = model.predict(xa, xv, &att);
    CHECK(pred.rows() == 4);
    CHECK(pred.cols() == 2);
    CHECK(att.C_a.rows() == 6);
    CHECK(att.C_a.cols() == 12);
    CHECK(att.H_a.rows() == 3);
    CHECK(att.H_a.cols() == 6);
    CHECK(att.X_att_a.rows() == 4);
    CHECK(att.clip_scores_a.size() == 4);
    for (std::size_t i = 0; i < att.C_a.size(); ++i)
        CHECK(std::abs(att.C_a[i]) <= 1.0);
    for (std::size_t i = 0; i < att.H_a.size(); ++i) CHECK(att.H_a[i] >= 0.0);
    for (double s : att.clip_scores_a) CHECK(s >= 0.0);
}

TEST_CASE("head biases alone set every clip's prediction") {
    ModelDims dims{4, 6, 6, 3, 5};
    auto model = FusionModel::init(FusionVariant::jca, dims, 100);
    for (auto& p : model.params()) p.value = Mat::zeros(p.value.rows(), p.value.cols());
    Mat* b2 = model.find_param("head_b2");
    (*b2)(0, 0) = 0.3;
    (*b2)(0, 1) = 0.1;
    Mat pred = model.predict(random_mat(4, 6, 18), random_mat(4, 6, 19));
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(pred(r, 0) == 0.3);
        CHECK(pred(r, 1) == 0.1);
    }
}

TEST_CASE("inference is seed-independent; training dropout is seed-determined") {
    ModelDims dims{4, 6, 6, 3, 5};
    auto model = FusionModel::init(FusionVariant::jca, dims, 101);
    Mat xa = random_mat(4, 6, 20);
    Mat xv = random_mat(4, 6, 21);

    auto run = [&](bool training, std::uint64_t seed) {
        Graph g;
        auto bound = model.bind(g);
        NodeId pred = model.forward(g, bound, xa, xv, DropoutSpec{0.5, training, seed});
        return g.value(pred);
    };
    CHECK(bit_equal(run(false, 1), run(false, 2)));
    CHECK(bit_equal(run(true, 7), run(true, 7)));
    CHECK(!bit_equal(run(true, 7), run(true, 8)));
}

TEST_CASE("dropout probability outside [0,1) is a config error") {
    ModelDims dims{4, 6, 6, 3, 5};
    auto model = FusionModel::init(FusionVariant::jca, dims, 102);
    Graph g;
    auto bound = model.bind(g);
    Mat xa = random_mat(4, 6, 22);
    Mat xv = random_mat(4, 6, 23);
    CHECK_THROWS_AS(model.forward(g, bound, xa, xv, DropoutSpec{1.0, true, 0}),
                    ConfigError);
}

TEST_CASE("residual identity: zeroed attention equals the concat baseline bitwise") {
    ModelDims dims{6, 5, 7, 4, 8};
    auto jca_model = FusionModel::init(FusionVariant::jca, dims, 103);
    zero_attention(jca_model);

    auto concat_model = FusionModel::init(FusionVariant::concat, dims, 104);
    for (const char* name : {"head_w1", "head_b1", "head_w2", "head_b2"})
        *concat_model.find_param(name) = *jca_model.find_param(name);

    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        Mat xa = random_mat(6, 5, 7000 + trial);
        Mat xv = random_mat(6, 7, 8000 + trial);
        CHECK(bit_equal(jca_model.predict(xa, xv), concat_model.predict(xa, xv)));
    }
}

TEST_CASE("ca variant: cross-correlation shapes and zero-weight constants") {
    ModelDims dims{4, 5, 7, 3, 6};
    auto model = FusionModel::init(FusionVariant::ca, dims, 105);
    AttentionOutputs att;
    Mat pred = model.predict(random_mat(4, 5, 24), random_mat(4, 7, 25), &att);
    CHECK(pred.rows() == 4);
    CHECK(att.C_a.rows() == 5);  // d_a x d_v
    CHECK(att.C_a.cols() == 7);
    CHECK(att.C_v.rows() == 7);
    CHECK(att.C_v.cols() == 5);

    for (auto& p : model.params()) p.value = Mat::zeros(p.value.rows(), p.value.cols());
    Mat* b2 = model.find_param("head_b2");
    (*b2)(0, 0) = -0.2;
    (*b2)(0, 1) = 0.6;
    Mat zp = model.predict(random_mat(4, 5, 26), random_mat(4, 7, 27));
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(zp(r, 0) == -0.2);
        CHECK(zp(r, 1) == 0.6);
    }
}

TEST_CASE("permutation covariance of the jca forward pass") {
    ModelDims dims{5, 4, 6, 3, 7};
    auto model = FusionModel::init(FusionVariant::jca, dims, 106);
    const std::size_t L = dims.L;

    const std::size_t perm[5] = {3, 0, 4, 1, 2};
    Mat P(L, L);
    for (std::size_t i = 0; i < L; ++i) P(i, perm[i]) = 1.0;

    Mat xa = random_mat(L, 4, 28);
    Mat xv = random_mat(L, 6, 29);
    Mat base = model.predict(xa, xv);

    auto permute_rows = [&](const Mat& m) {
        Mat out(m.rows(), m.cols());
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(perm[r], c);
        return out;
    };
    // P*M permutes rows as out[i] = m[perm[i]].
    auto left = [&](const Mat& m) {
        Graph g;
        return g.value(g.matmul(g.leaf(P), g.leaf(m)));
    };
    auto right_t = [&](const Mat& m) {  // M * P^T
        Graph g;
        return g.value(g.matmul(g.leaf(m), g.transpose(g.leaf(P))));
    };

    auto conj = model;
    *conj.find_param("W_ja") = left(right_t(*model.find_param("W_ja")));
    *conj.find_param("W_jv") = left(right_t(*model.find_param("W_jv")));
    *conj.find_param("W_a") = right_t(*model.find_param("W_a"));
    *conj.find_param("W_v") = right_t(*model.find_param("W_v"));
    *conj.find_param("W_ha") = left(*model.find_param("W_ha"));
    *conj.find_param("W_hv") = left(*model.find_param("W_hv"));

    Mat permuted_pred = conj.predict(permute_rows(xa), permute_rows(xv));
    Mat expected = permute_rows(base);
    for (std::size_t i = 0; i < expected.size(); ++i)
        CHECK(permuted_pred[i] == doctest::Approx(expected[i]).epsilon(1e-10));
}

TEST_CASE("full jca + head + ccc loss gradients pass the finite-difference oracle") {
    ModelDims dims{8, 8, 8, 4, 5};
    auto model = FusionModel::init(FusionVariant::jca, dims, 107);
    Mat xa = random_mat(8, 8, 30);
    Mat xv = random_mat(8, 8, 31);
    Mat gt(8, 2);
    Rng rng(32);
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = rng.uniform(-0.8, 0.8);

    auto eval = [&]() {
        Graph g;
        auto bound = model.bind(g);
        NodeId pred = model.forward(g, bound, xa, xv);
        return g.value(ccc_loss(g, pred, gt).loss)[0];
    };

    Graph g;
    auto bound = model.bind(g);
    NodeId pred = model.forward(g, bound, xa, xv);
    g.backward(ccc_loss(g, pred, gt).loss);

    std::vector<std::pair<std::string, Mat*>> params;
    std::vector<Mat> analytic;
    for (std::size_t i = 0; i < model.params().size(); ++i) {
        params.emplace_back(model.params()[i].name, &model.params()[i].value);
        const Mat& gm = g.grad(bound.ids[i]);
        analytic.push_back(gm.empty() ? Mat(model.params()[i].value.rows(),
                                            model.params()[i].value.cols())
                                      : gm);
    }
    const auto report = finite_diff_check(eval, params, analytic, 1e-5);
    CAPTURE(report.worst_param);
    CAPTURE(report.analytic_at_worst);
    CAPTURE(report.numeric_at_worst);
    CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("combiner: single backbone with identity weights is a no-op") {
    Mat x = random_mat(5, 4, 33);
    ModalFeatures f{x, Modality::audio, 25.0};
    auto out = combine_backbones_concat_fc(std::span<const ModalFeatures>(&f, 1),
                                           Mat::identity(4));
    CHECK(bit_equal(out.X, x));
}

TEST_CASE("combiner: two Lx4 sets project to Lx6; clip mismatch is rejected") {
    std::vector<ModalFeatures> feats{
        {random_mat(5, 4, 34), Modality::audio, 25.0},
        {random_mat(5, 4, 35), Modality::audio, 25.0}};
    auto out = combine_backbones_concat_fc(feats, random_mat(8, 6, 36));
    CHECK(out.X.rows() == 5);
    CHECK(out.X.cols() == 6);

    feats[1].X = random_mat(4, 4, 37);
    CHECK_THROWS_AS(combine_backbones_concat_fc(feats, random_mat(8, 6, 38)),
                    AlignError);
}

TEST_CASE("combiner weights receive correct gradients inside the model") {
    ModelDims dims{4, 3, 3, 2, 4};
    CombinerSpec comb{true, {2, 3}, {4}};
    auto model = FusionModel::init(FusionVariant::jca, dims, 108, comb);
    std::vector<Mat> audio{random_mat(4, 2, 39), random_mat(4, 3, 40)};
    std::vector<Mat> visual{random_mat(4, 4, 41)};
    Mat gt(4, 2);
    Rng rng(42);
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = rng.uniform(-0.8, 0.8);

    auto eval = [&]() {
        Graph g;
        auto bound = model.bind(g);
        NodeId pred = model.forward(g, bound, audio, visual);
        return g.value(ccc_loss(g, pred, gt).loss)[0];
    };
    Graph g;
    auto bound = model.bind(g);
    NodeId pred = model.forward(g, bound, audio, visual);
    g.backward(ccc_loss(g, pred, gt).loss);

    std::vector<std::pair<std::string, Mat*>> params;
    std::vector<Mat> analytic;
    for (std::size_t i = 0; i < model.params().size(); ++i) {
        const auto& name = model.params()[i].name;
        if (name != "W_comb_a" && name != "W_comb_v") continue;
        params.emplace_back(name, &model.params()[i].value);
        analytic.push_back(g.grad(bound.ids[i]));
    }
    REQUIRE(params.size() == 2);
    const auto report = finite_diff_check(eval, params, analytic, 1e-5);
    CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("stacking: identity for one backbone, block shape for two, slices back") {
    ModalFeatures one{random_mat(8, 16, 43), Modality::visual, 25.0};
    auto same = combine_backbones_stack(std::span<const ModalFeatures>(&one, 1));
    CHECK(bit_equal(same.X, one.X));

    std::vector<ModalFeatures> feats{
        {random_mat(8, 16, 44), Modality::visual, 25.0},
        {random_mat(8, 16, 45), Modality::visual, 25.0}};
    auto block = combine_backbones_stack(feats);
    CHECK(block.X.rows() == 16);
    CHECK(block.X.cols() == 16);
    CHECK(bit_equal(block.X.slice_rows(0, 8), feats[0].X));
    CHECK(bit_equal(block.X.slice_rows(8, 16), feats[1].X));

    feats[1].X = random_mat(8, 12, 46);
    CHECK_THROWS_AS(combine_backbones_stack(feats), DimError);
}

TEST_CASE("forward validates feature dims against the model") {
    ModelDims dims{4, 6, 6, 3, 5};
    auto model = FusionModel::init(FusionVariant::jca, dims, 109);
    CHECK_THROWS_AS(model.predict(random_mat(4, 5, 47), random_mat(4, 6, 48)),
                    DimError);
    CHECK_THROWS_AS(model.predict(random_mat(3, 6, 49), random_mat(4, 6, 50)),
                    DimError);
}
