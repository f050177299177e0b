#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jca/graph.hpp"
#include "jca/mat.hpp"

namespace jca {

enum class Modality { audio, visual };

// One modality's clip-level feature sequence: row l is the feature vector of
// clip l, so X is L x d_m.
struct ModalFeatures {
    Mat X;
    Modality modality = Modality::audio;
    double clips_per_second = 1.0;
};

enum class FusionVariant { jca, ca, concat, audio_only, visual_only };

std::string to_string(FusionVariant v);
FusionVariant fusion_variant_from(std::string_view s);

struct ModelDims {
    std::size_t L = 0;       // clips per sub-sequence the model is built for
    std::size_t d_a = 0;     // audio feature dim
    std::size_t d_v = 0;     // visual feature dim
    std::size_t k = 32;      // attention map rows
    std::size_t h_head = 128;  // hidden width of the prediction head

    std::size_t d() const { return d_a + d_v; }
    bool operator==(const ModelDims&) const = default;
};

// Intermediate tensors of one forward pass, for inspection and the
// attention-score dumps. clip_scores are the row norms of the
// attended-minus-input deltas; the correlation/attention matrices are empty
// for variants without an attention path.
struct AttentionOutputs {
    Mat C_a, C_v;            // joint correlation matrices
    Mat H_a, H_v;            // attention maps (relu range, >= 0)
    Mat X_att_a, X_att_v;    // attended features (residual form)
    std::vector<double> clip_scores_a, clip_scores_v;
};

struct NamedParam {
    std::string name;
    Mat value;
};

struct DropoutSpec {
    double p = 0.0;
    bool training = false;
    std::uint64_t seed = 0;
};

// Optional per-modality backbone combiner: features from several backbones
// are column-concatenated and linearly projected to the model's d_a / d_v by
// a learned matrix ("concatenation + FC"). Disabled means a single backbone
// feeds each modality directly.
struct CombinerSpec {
    bool enabled = false;
    std::vector<std::size_t> audio_in_dims;
    std::vector<std::size_t> visual_in_dims;
};

// The fusion model family: joint cross-attention, the vanilla cross-attention
// baseline, plain concatenation, and the two unimodal heads. All variants end
// in the same two-layer per-clip head (linear d_in -> h_head, relu, linear
// h_head -> 2); column 0 of the output is valence, column 1 arousal.
class FusionModel {
public:
    static FusionModel init(FusionVariant variant, ModelDims dims, std::uint64_t seed,
                            CombinerSpec combiner = {});

    // Reconstructs a model around externally provided parameters (checkpoint
    // load). Shapes are validated against the variant/dims.
    static FusionModel from_params(FusionVariant variant, ModelDims dims,
                                   std::vector<NamedParam> params,
                                   CombinerSpec combiner = {});

    FusionVariant variant() const { return variant_; }
    const ModelDims& dims() const { return dims_; }
    const CombinerSpec& combiner() const { return combiner_; }

    std::vector<NamedParam>& params() { return params_; }
    const std::vector<NamedParam>& params() const { return params_; }

    Mat* find_param(std::string_view name);
    const Mat* find_param(std::string_view name) const;

    // Parameter leaves on a tape, in parameter order, requires_grad on.
    struct Bound {
        std::vector<NodeId> ids;
    };
    Bound bind(Graph& g) const;

    // Builds the forward pass for one sub-sequence and returns the Lx2
    // prediction node. Feature spans carry one Mat per backbone; exactly one
    // unless the combiner is enabled.
    NodeId forward(Graph& g, const Bound& bound, std::span<const Mat> audio_feats,
                   std::span<const Mat> visual_feats, const DropoutSpec& dropout = {},
                   AttentionOutputs* att = nullptr) const;

    NodeId forward(Graph& g, const Bound& bound, const Mat& X_a, const Mat& X_v,
                   const DropoutSpec& dropout = {},
                   AttentionOutputs* att = nullptr) const;

    // Convenience: run a forward pass on a throwaway tape and return the
    // prediction values.
    Mat predict(const Mat& X_a, const Mat& X_v, AttentionOutputs* att = nullptr) const;
    Mat predict(std::span<const Mat> audio_feats, std::span<const Mat> visual_feats,
                AttentionOutputs* att = nullptr) const;

private:
    FusionVariant variant_ = FusionVariant::jca;
    ModelDims dims_;
    CombinerSpec combiner_;
    std::vector<NamedParam> params_;

    std::size_t index_of(std::string_view name) const;
    NodeId param_node(const Bound& b, std::string_view name) const;
    std::size_t head_input_dim() const;
};

// Graph builders for the attention pieces. d_scale is the divisor applied
// inside the tanh, sqrt(width of the right-hand features).

// tanh(X_m^T * W * F / sqrt(scale_dim)); X_m: L x d_m, W: L x L, F: L x f.
NodeId joint_correlation(Graph& g, NodeId X_m, NodeId F, NodeId W,
                         std::size_t scale_dim);

// relu(W_m * X_m + W_cm * C_m^T); result k x d_m.
NodeId attention_maps(Graph& g, NodeId X_m, NodeId C_m, NodeId W_m, NodeId W_cm);

// W_hm * H_m + X_m (residual); result L x d_m.
NodeId attended_features(Graph& g, NodeId X_m, NodeId H_m, NodeId W_hm);

// Column-concatenates per-backbone features sharing L and modality, then
// applies one linear projection; weights is (sum of input dims) x out_dim.
ModalFeatures combine_backbones_concat_fc(std::span<const ModalFeatures> features,
                                          const Mat& weights);

// Stacks per-backbone features sharing the column count into one
// (sum of L_i) x d_m block; no parameters involved.
ModalFeatures combine_backbones_stack(std::span<const ModalFeatures> features);

// Inverted-dropout mask: entries are 1/(1-p) with probability 1-p, else 0.
Mat dropout_mask(std::size_t rows, std::size_t cols, double p, std::uint64_t seed);

}  // namespace jca
