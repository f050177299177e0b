#include "jca/optim.hpp"

#include <algorithm>
#include <cmath>

#include "jca/errors.hpp"
#include "jca/kernels.hpp"
#include "jca/rng.hpp"
#include "jca/threads.hpp"

namespace jca {

Mat xavier_init(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Mat m(rows, cols);
    Rng rng(seed);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(-bound, bound);
    return m;
}

namespace {
void require_finite_grad(const Mat& grad) {
    if (!grad.all_finite()) {
        throw EvalError("optimizer: non-finite gradient, update rejected");
    }
}
}  // namespace

void adam_step(Mat& param, const Mat& grad, Mat& m, Mat& v, std::size_t t,
               const AdamHyper& hp) {
    if (!param.same_shape(grad)) {
        throw DimError("adam_step: param " + param.shape_str() + " vs grad " +
                       grad.shape_str());
    }
    require_finite_grad(grad);
    if (m.empty()) m = Mat(param.rows(), param.cols());
    if (v.empty()) v = Mat(param.rows(), param.cols());

    if (hp.weight_decay != 0.0) {
        kernels::active().axpy(-hp.lr * hp.weight_decay, param.data(), param.data(),
                               param.size());
    }
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g;
        v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g * g;
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        param[i] -= hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps);
    }
}

void sgd_step(Mat& param, const Mat& grad, Mat& velocity, const SgdHyper& hp) {
    if (!param.same_shape(grad)) {
        throw DimError("sgd_step: param " + param.shape_str() + " vs grad " +
                       grad.shape_str());
    }
    require_finite_grad(grad);
    if (velocity.empty()) velocity = Mat(param.rows(), param.cols());
    for (std::size_t i = 0; i < param.size(); ++i) {
        velocity[i] = hp.momentum * velocity[i] + grad[i] + hp.weight_decay * param[i];
        param[i] -= hp.lr * velocity[i];
    }
}

Optimizer::Optimizer(OptimKind kind, double lr, double weight_decay,
                     std::span<const NamedParam> params)
    : kind_(kind) {
    adam.lr = lr;
    adam.weight_decay = weight_decay;
    sgd.lr = lr;
    sgd.weight_decay = weight_decay;
    m_.resize(params.size());
    v_.resize(params.size());
}

void Optimizer::step(std::span<NamedParam> params, std::span<const Mat> grads) {
    if (params.size() != grads.size() || params.size() != m_.size()) {
        throw DimError("Optimizer::step: param/grad/state count mismatch");
    }
    ++step_count_;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (kind_ == OptimKind::adam) {
            adam_step(params[i].value, grads[i], m_[i], v_[i], step_count_, adam);
        } else {
            sgd_step(params[i].value, grads[i], m_[i], sgd);
        }
    }
}

Mat predict_all(const FusionModel& model, std::span<const TrainItem> items,
                int threads) {
    std::vector<Mat> preds(items.size());
    parallel_for(items.size(), threads, [&](std::size_t i) {
        preds[i] = model.predict(items[i].audio, items[i].visual);
    });
    std::size_t total = 0;
    for (const Mat& p : preds) total += p.rows();
    Mat out(total, 2);
    std::size_t r0 = 0;
    for (const Mat& p : preds) {
        for (std::size_t r = 0; r < p.rows(); ++r) {
            out(r0 + r, 0) = p(r, 0);
            out(r0 + r, 1) = p(r, 1);
        }
        r0 += p.rows();
    }
    return out;
}

Mat labels_all(std::span<const TrainItem> items) {
    std::size_t total = 0;
    for (const auto& it : items) total += it.labels.rows();
    Mat out(total, 2);
    std::size_t r0 = 0;
    for (const auto& it : items) {
        for (std::size_t r = 0; r < it.labels.rows(); ++r) {
            out(r0 + r, 0) = it.labels(r, 0);
            out(r0 + r, 1) = it.labels(r, 1);
        }
        r0 += it.labels.rows();
    }
    return out;
}

SplitCcc evaluate_ccc(const FusionModel& model, std::span<const TrainItem> items,
                      int threads) {
    Mat pred = predict_all(model, items, threads);
    Mat gt = labels_all(items);
    SplitCcc out;
    out.valence = ccc(pred.col(0), gt.col(0));
    out.arousal = ccc(pred.col(1), gt.col(1));
    return out;
}

TrainResult train_loop(FusionModel& model, std::span<const TrainItem> train_items,
                       std::span<const TrainItem> val_items, const TrainConfig& cfg) {
    if (train_items.empty()) throw ConfigError("train_loop: empty training split");
    if (val_items.empty()) throw ConfigError("train_loop: empty validation split");
    if (cfg.batch_size == 0) throw ConfigError("train_loop: batch_size must be >= 1");
    if (cfg.dropout_p < 0.0 || cfg.dropout_p >= 1.0) {
        throw ConfigError("train_loop: dropout_p must be in [0,1)");
    }

    Optimizer opt(cfg.optimizer, cfg.learning_rate, cfg.weight_decay,
                  model.params());

    TrainResult result;
    std::vector<NamedParam> best = model.params();
    double best_metric = -2.0;
    std::size_t epochs_since_best = 0;
    std::uint64_t dropout_counter = 0;

    std::vector<std::size_t> order(train_items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        // Deterministic per-epoch shuffle (Fisher-Yates on a seeded stream).
        Rng shuffle_rng(mix_seed(cfg.seed, epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = shuffle_rng.below(i);
            std::swap(order[i - 1], order[j]);
        }

        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop =
                std::min(order.size(), start + cfg.batch_size);

            Graph g;
            FusionModel::Bound bound = model.bind(g);
            NodeId batch_pred{};
            Mat batch_labels;
            for (std::size_t bi = start; bi < stop; ++bi) {
                const TrainItem& item = train_items[order[bi]];
                DropoutSpec drop{cfg.dropout_p, true,
                                 mix_seed(cfg.seed ^ 0x9e3779b9ULL, dropout_counter++)};
                NodeId pred = model.forward(g, bound, item.audio, item.visual, drop);
                batch_pred = batch_pred.valid() ? g.concat_rows(batch_pred, pred) : pred;
                batch_labels = batch_labels.empty() ? item.labels
                                                    : vcat(batch_labels, item.labels);
            }

            CccLossResult loss = ccc_loss(g, batch_pred, batch_labels);
            g.backward(loss.loss);
            loss_sum += g.value(loss.loss)[0];
            ++batches;

            std::vector<Mat> grads;
            grads.reserve(bound.ids.size());
            for (NodeId id : bound.ids) {
                const Mat& gm = g.grad(id);
                grads.push_back(gm.empty()
                                    ? Mat(g.value(id).rows(), g.value(id).cols())
                                    : gm);
            }
            opt.step(model.params(), grads);
        }

        SplitCcc val = evaluate_ccc(model, val_items, cfg.threads);
        EpochMetrics row;
        row.epoch = epoch;
        row.train_loss = loss_sum / static_cast<double>(batches);
        row.val_ccc_valence = val.valence.degenerate ? 0.0 : val.valence.rho_c;
        row.val_ccc_arousal = val.arousal.degenerate ? 0.0 : val.arousal.rho_c;
        result.history.push_back(row);

        const double metric = 0.5 * (row.val_ccc_valence + row.val_ccc_arousal);
        if (metric > best_metric) {
            best_metric = metric;
            best = model.params();
            result.best_epoch = epoch;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
            if (epochs_since_best > cfg.patience) break;
        }
    }

    model.params() = std::move(best);
    result.best_val_ccc_mean = best_metric;
    return result;
}

}  // namespace jca
