#include "jca/ccc.hpp"

#include <cmath>

#include "jca/errors.hpp"

namespace jca {

CccReport ccc(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw AlignError("ccc: track lengths differ: " + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()));
    }
    if (x.size() < 2) {
        throw AlignError("ccc: need at least 2 samples, got " +
                         std::to_string(x.size()));
    }
    const double n = static_cast<double>(x.size());

    CccReport r;
    for (double v : x) r.mu_x += v;
    for (double v : y) r.mu_y += v;
    r.mu_x /= n;
    r.mu_y /= n;

    // var is computed as cov(t, t) so that ccc(x, x) == 1 holds bit-exactly.
    auto cov = [n](std::span<const double> s, std::span<const double> t, double mu_s,
                   double mu_t) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i)
            acc += (s[i] - mu_s) * (t[i] - mu_t);
        return acc / n;
    };
    r.var_x = cov(x, x, r.mu_x, r.mu_x);
    r.var_y = cov(y, y, r.mu_y, r.mu_y);
    r.cov_xy = cov(x, y, r.mu_x, r.mu_y);

    const double dmu = r.mu_x - r.mu_y;
    const double denom = r.var_x + r.var_y + dmu * dmu;
    if (denom == 0.0) {
        r.rho_c = 0.0;
        r.degenerate = true;
    } else {
        r.rho_c = 2.0 * r.cov_xy / denom;
    }
    return r;
}

namespace {

// 1 - rho_c for one column, built on the tape. Returns an invalid NodeId if
// the denominator is exactly zero (degenerate target).
NodeId ccc_loss_column(Graph& g, NodeId pred_col, NodeId gt_col, double* rho_out) {
    const std::size_t n = g.value(pred_col).rows();
    const double inv_n = 1.0 / static_cast<double>(n);

    NodeId mu_p = g.scale_const(g.sum_all(pred_col), inv_n);
    NodeId mu_t = g.scale_const(g.sum_all(gt_col), inv_n);

    NodeId dp = g.add_rowvec(pred_col, g.scale_const(mu_p, -1.0));
    NodeId dt = g.add_rowvec(gt_col, g.scale_const(mu_t, -1.0));

    NodeId var_p = g.scale_const(g.sum_all(g.hadamard(dp, dp)), inv_n);
    NodeId var_t = g.scale_const(g.sum_all(g.hadamard(dt, dt)), inv_n);
    NodeId cov = g.scale_const(g.sum_all(g.hadamard(dp, dt)), inv_n);

    NodeId dmu = g.sub(mu_p, mu_t);
    NodeId denom = g.add(g.add(var_p, var_t), g.hadamard(dmu, dmu));

    if (g.value(denom)[0] == 0.0) {
        if (rho_out != nullptr) *rho_out = 0.0;
        return NodeId{};
    }
    NodeId rho = g.div(g.scale_const(cov, 2.0), denom);
    if (rho_out != nullptr) *rho_out = g.value(rho)[0];
    return g.add_const(g.scale_const(rho, -1.0), 1.0);
}

}  // namespace

CccLossResult ccc_loss(Graph& g, NodeId pred, const Mat& gt) {
    const Mat& pv = g.value(pred);
    if (pv.cols() != 2 || gt.cols() != 2) {
        throw DimError("ccc_loss: expected Lx2 tracks, got " + pv.shape_str() +
                       " and " + gt.shape_str());
    }
    if (pv.rows() != gt.rows()) {
        throw AlignError("ccc_loss: prediction rows " + std::to_string(pv.rows()) +
                         " vs ground truth rows " + std::to_string(gt.rows()));
    }
    if (pv.rows() < 2) {
        throw AlignError("ccc_loss: need at least 2 clips");
    }

    NodeId gt_node = g.leaf(gt, /*requires_grad=*/false);

    CccLossResult out{};
    NodeId per_target[2];
    double rho[2] = {0.0, 0.0};
    bool degenerate[2] = {false, false};
    for (std::size_t c = 0; c < 2; ++c) {
        NodeId pc = g.slice_cols(pred, c, c + 1);
        NodeId tc = g.slice_cols(gt_node, c, c + 1);
        per_target[c] = ccc_loss_column(g, pc, tc, &rho[c]);
        if (!per_target[c].valid()) {
            degenerate[c] = true;
            per_target[c] = g.leaf(Mat::full(1, 1, 1.0), false);
        }
    }
    out.loss = g.scale_const(g.add(per_target[0], per_target[1]), 0.5);
    out.rho_valence = rho[0];
    out.rho_arousal = rho[1];
    out.degenerate_valence = degenerate[0];
    out.degenerate_arousal = degenerate[1];
    return out;
}

double ccc_loss_value(const Mat& pred, const Mat& gt) {
    double total = 0.0;
    for (std::size_t c = 0; c < 2; ++c) {
        CccReport r = ccc(pred.col(c), gt.col(c));
        total += (1.0 - (r.degenerate ? 0.0 : r.rho_c)) * 0.5;
    }
    return total;
}

}  // namespace jca
