#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jca/ccc.hpp"
#include "jca/fusion.hpp"
#include "jca/mat.hpp"

namespace jca {

// Uniform Xavier/Glorot init: entries in +-sqrt(6/(fan_in + fan_out)).
Mat xavier_init(std::size_t rows, std::size_t cols, std::uint64_t seed);

enum class OptimKind { adam, sgd };

struct AdamHyper {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled: applied before the Adam delta
};

struct SgdHyper {
    double lr = 0.001;
    double momentum = 0.9;
    double weight_decay = 0.0;  // coupled: added to the gradient
};

// One Adam update with bias correction; `t` is the 1-based step count after
// this update. Rejects non-finite gradients.
void adam_step(Mat& param, const Mat& grad, Mat& m, Mat& v, std::size_t t,
               const AdamHyper& hp);

// v <- momentum*v + g + wd*theta;  theta <- theta - lr*v
void sgd_step(Mat& param, const Mat& grad, Mat& velocity, const SgdHyper& hp);

// Per-model optimizer state, buffers parallel to the parameter list.
class Optimizer {
public:
    Optimizer(OptimKind kind, double lr, double weight_decay,
              std::span<const NamedParam> params);

    void step(std::span<NamedParam> params, std::span<const Mat> grads);

    std::size_t step_count() const { return step_count_; }

    AdamHyper adam;
    SgdHyper sgd;

private:
    OptimKind kind_;
    std::vector<Mat> m_;
    std::vector<Mat> v_;
    std::size_t step_count_ = 0;
};

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t batch_size = 16;
    std::size_t max_epochs = 200;
    std::size_t patience = 20;
    double weight_decay = 5e-4;
    double dropout_p = 0.5;
    std::uint64_t seed = 1;
    OptimKind optimizer = OptimKind::adam;
    int threads = 1;
};

// One sub-sequence of aligned features and labels; the unit the training
// loop batches over.
struct TrainItem {
    std::vector<Mat> audio;   // one Mat per backbone, each L x d
    std::vector<Mat> visual;
    Mat labels;               // L x 2 (valence, arousal)
    std::string sequence_id;
    std::size_t offset = 0;   // first clip's index within its source sequence
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_ccc_valence = 0.0;
    double val_ccc_arousal = 0.0;
};

struct TrainResult {
    std::vector<EpochMetrics> history;
    std::size_t best_epoch = 0;
    double best_val_ccc_mean = 0.0;
};

// Validation-set CCC: predictions of all items are concatenated in item
// order and scored per target over the whole span.
struct SplitCcc {
    CccReport valence;
    CccReport arousal;
    double mean() const {
        return 0.5 * ((valence.degenerate ? 0.0 : valence.rho_c) +
                      (arousal.degenerate ? 0.0 : arousal.rho_c));
    }
};

SplitCcc evaluate_ccc(const FusionModel& model, std::span<const TrainItem> items,
                      int threads = 1);

// Predictions for all items, concatenated in item order ((sum L) x 2).
Mat predict_all(const FusionModel& model, std::span<const TrainItem> items,
                int threads = 1);

Mat labels_all(std::span<const TrainItem> items);

// Mini-batch training with CCC loss, early stopping on the mean of the two
// validation CCCs, and restoration of the best-epoch parameters. The batch
// loss is computed over the concatenated clips of the batch's sub-sequences.
// Deterministic for fixed (seed, data, config) in single-threaded mode.
TrainResult train_loop(FusionModel& model, std::span<const TrainItem> train_items,
                       std::span<const TrainItem> val_items, const TrainConfig& cfg);

}  // namespace jca
