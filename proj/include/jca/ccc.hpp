#pragma once

#include <span>

#include "jca/graph.hpp"
#include "jca/mat.hpp"

namespace jca {

// Concordance correlation coefficient between two equal-length tracks,
// with the population moments it was computed from:
//
//   rho_c = 2*cov / (var_x + var_y + (mu_x - mu_y)^2)
//
// A pair of constant tracks with equal means has a zero denominator; that
// case is reported as rho_c = 0 with `degenerate` set instead of an error,
// so constant-prediction collapse stays visible but non-fatal.
struct CccReport {
    double rho_c = 0.0;
    double mu_x = 0.0;
    double mu_y = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    double cov_xy = 0.0;
    bool degenerate = false;
};

// Population (1/N) moments. Requires equal lengths, N >= 2.
CccReport ccc(std::span<const double> x, std::span<const double> y);

// Differentiable training loss over an Lx2 prediction node against Lx2
// ground truth (column 0 valence, column 1 arousal):
//
//   loss = (1 - rho_c(valence))/2 + (1 - rho_c(arousal))/2
//
// A degenerate target contributes a constant 1.0 and raises its flag.
struct CccLossResult {
    NodeId loss;
    double rho_valence = 0.0;
    double rho_arousal = 0.0;
    bool degenerate_valence = false;
    bool degenerate_arousal = false;
};

CccLossResult ccc_loss(Graph& g, NodeId pred, const Mat& gt);

// Mean of the per-target (1 - rho_c) losses on plain matrices, no graph.
double ccc_loss_value(const Mat& pred, const Mat& gt);

}  // namespace jca
