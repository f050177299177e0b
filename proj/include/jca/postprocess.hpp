#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "jca/ccc.hpp"

namespace jca {

// Fitted prediction post-processing: median filter, then the affine map
// scale*x + bias (the folded form of mean-centering followed by
// std-matching on the fitting split), then an annotation time shift that
// only changes how predictions are paired with ground truth. (window=1,
// bias=0, scale=1, shift=0) is the identity.
struct PostprocChain {
    std::size_t median_window = 1;  // odd
    double bias = 0.0;
    double scale = 1.0;
    std::size_t shift = 0;  // clips of annotation delay

    bool operator==(const PostprocChain&) const = default;
};

// Sliding median with replicate padding; output length equals input length.
// The window must be odd.
std::vector<double> median_filter(std::span<const double> x, std::size_t window);

struct CenterResult {
    std::vector<double> out;
    double bias = 0.0;  // mu_gt - mu_pred on the fitting pair
};
CenterResult center_bias(std::span<const double> pred, std::span<const double> gt);

struct ScaleResult {
    std::vector<double> out;
    double scale = 1.0;  // sigma_gt / sigma_pred on the fitting pair
    bool degenerate = false;  // sigma_pred == 0; scale forced to 1
};
ScaleResult scale_match(std::span<const double> pred, std::span<const double> gt);

// Pairs prediction at t with annotation at t+shift; both sides truncated to
// length N-shift. Requires shift < N.
std::pair<std::vector<double>, std::vector<double>> time_shift(
    std::span<const double> pred, std::span<const double> gt, std::size_t shift);

// Median + affine; the shift is applied by the caller when pairing with
// annotations (see ccc_after).
std::vector<double> apply_chain(const PostprocChain& chain,
                                std::span<const double> pred);

// CCC of the fully post-processed prediction against the shifted annotations.
CccReport ccc_after(const PostprocChain& chain, std::span<const double> pred,
                    std::span<const double> gt);

// Exhaustive (window, shift) search on a fitting pair; bias and scale are
// refitted per cell in the fixed order median -> center -> scale -> shift.
// Ties break toward the smaller window, then the smaller shift.
struct GridSearchResult {
    PostprocChain chain;
    double fit_ccc = -2.0;
};
GridSearchResult grid_search_postproc(std::span<const double> pred,
                                      std::span<const double> gt,
                                      std::span<const std::size_t> windows,
                                      std::span<const std::size_t> shifts);

void save_chain(const std::filesystem::path& path, const PostprocChain& chain);
PostprocChain load_chain(const std::filesystem::path& path);

}  // namespace jca
