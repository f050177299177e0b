#include "jca/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jca/errors.hpp"
#include "jca/optim.hpp"
#include "jca/rng.hpp"

namespace jca {

std::string to_string(FusionVariant v) {
    switch (v) {
        case FusionVariant::jca: return "jca";
        case FusionVariant::ca: return "ca";
        case FusionVariant::concat: return "concat";
        case FusionVariant::audio_only: return "audio_only";
        case FusionVariant::visual_only: return "visual_only";
    }
    return "?";
}

FusionVariant fusion_variant_from(std::string_view s) {
    if (s == "jca") return FusionVariant::jca;
    if (s == "ca") return FusionVariant::ca;
    if (s == "concat") return FusionVariant::concat;
    if (s == "audio_only" || s == "audio") return FusionVariant::audio_only;
    if (s == "visual_only" || s == "visual") return FusionVariant::visual_only;
    throw ConfigError("unknown fusion variant: " + std::string(s));
}

NodeId joint_correlation(Graph& g, NodeId X_m, NodeId F, NodeId W,
                         std::size_t scale_dim) {
    NodeId prod = g.matmul(g.matmul(g.transpose(X_m), W), F);
    return g.tanh(g.scale_const(prod, 1.0 / std::sqrt(static_cast<double>(scale_dim))));
}

NodeId attention_maps(Graph& g, NodeId X_m, NodeId C_m, NodeId W_m, NodeId W_cm) {
    return g.relu(g.add(g.matmul(W_m, X_m), g.matmul(W_cm, g.transpose(C_m))));
}

NodeId attended_features(Graph& g, NodeId X_m, NodeId H_m, NodeId W_hm) {
    return g.add(g.matmul(W_hm, H_m), X_m);
}

Mat dropout_mask(std::size_t rows, std::size_t cols, double p, std::uint64_t seed) {
    Mat mask(rows, cols);
    Rng rng(seed);
    const double keep_scale = 1.0 / (1.0 - p);
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = rng.next_double() >= p ? keep_scale : 0.0;
    return mask;
}

namespace {

std::size_t sum_dims(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{0});
}

}  // namespace

std::size_t FusionModel::head_input_dim() const {
    switch (variant_) {
        case FusionVariant::audio_only: return dims_.d_a;
        case FusionVariant::visual_only: return dims_.d_v;
        default: return dims_.d();
    }
}

FusionModel FusionModel::init(FusionVariant variant, ModelDims dims,
                              std::uint64_t seed, CombinerSpec combiner) {
    FusionModel m;
    m.variant_ = variant;
    m.dims_ = dims;
    m.combiner_ = combiner;

    std::size_t n = 0;
    auto xavier = [&](const std::string& name, std::size_t r, std::size_t c,
                      double gain = 1.0) {
        Mat w = xavier_init(r, c, mix_seed(seed, n++));
        if (gain != 1.0) {
            for (std::size_t i = 0; i < w.size(); ++i) w[i] *= gain;
        }
        m.params_.push_back({name, std::move(w)});
    };
    auto zeros = [&](const std::string& name, std::size_t r, std::size_t c) {
        m.params_.push_back({name, Mat::zeros(r, c)});
        ++n;
    };

    // The residual output projections start near zero so the attended
    // features open at the plain concatenation baseline; the branch then
    // grows only where it reduces the loss.
    const double residual_gain = 0.05;

    const std::size_t L = dims.L, d_a = dims.d_a, d_v = dims.d_v, k = dims.k;
    if (variant == FusionVariant::jca) {
        xavier("W_ja", L, L);
        xavier("W_jv", L, L);
        xavier("W_a", k, L);
        xavier("W_v", k, L);
        xavier("W_ca", k, dims.d());
        xavier("W_cv", k, dims.d());
        xavier("W_ha", L, k, residual_gain);
        xavier("W_hv", L, k, residual_gain);
    } else if (variant == FusionVariant::ca) {
        xavier("W_av", L, L);
        xavier("W_va", L, L);
        xavier("W_a", k, L);
        xavier("W_v", k, L);
        xavier("W_ca", k, d_v);
        xavier("W_cv", k, d_a);
        xavier("W_ha", L, k, residual_gain);
        xavier("W_hv", L, k, residual_gain);
    }

    if (combiner.enabled) {
        xavier("W_comb_a", sum_dims(combiner.audio_in_dims), d_a);
        xavier("W_comb_v", sum_dims(combiner.visual_in_dims), d_v);
    }

    xavier("head_w1", m.head_input_dim(), dims.h_head);
    zeros("head_b1", 1, dims.h_head);
    xavier("head_w2", dims.h_head, 2);
    zeros("head_b2", 1, 2);
    return m;
}

FusionModel FusionModel::from_params(FusionVariant variant, ModelDims dims,
                                     std::vector<NamedParam> params,
                                     CombinerSpec combiner) {
    FusionModel reference = init(variant, dims, /*seed=*/0, combiner);
    if (params.size() != reference.params_.size()) {
        throw CheckpointError("parameter count mismatch: expected " +
                              std::to_string(reference.params_.size()) + ", got " +
                              std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const NamedParam& want = reference.params_[i];
        if (params[i].name != want.name || !params[i].value.same_shape(want.value)) {
            throw CheckpointError("parameter " + std::to_string(i) + " is " +
                                  params[i].name + " " + params[i].value.shape_str() +
                                  ", expected " + want.name + " " +
                                  want.value.shape_str());
        }
    }
    reference.params_ = std::move(params);
    return reference;
}

Mat* FusionModel::find_param(std::string_view name) {
    for (auto& p : params_)
        if (p.name == name) return &p.value;
    return nullptr;
}

const Mat* FusionModel::find_param(std::string_view name) const {
    for (const auto& p : params_)
        if (p.name == name) return &p.value;
    return nullptr;
}

std::size_t FusionModel::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i].name == name) return i;
    throw LookupError("no parameter named " + std::string(name) + " in variant " +
                      to_string(variant_));
}

FusionModel::Bound FusionModel::bind(Graph& g) const {
    Bound b;
    b.ids.reserve(params_.size());
    for (const auto& p : params_) b.ids.push_back(g.leaf(p.value, true));
    return b;
}

NodeId FusionModel::param_node(const Bound& b, std::string_view name) const {
    return b.ids[index_of(name)];
}

NodeId FusionModel::forward(Graph& g, const Bound& bound, const Mat& X_a,
                            const Mat& X_v, const DropoutSpec& dropout,
                            AttentionOutputs* att) const {
    const Mat* a = &X_a;
    const Mat* v = &X_v;
    return forward(g, bound, std::span<const Mat>(a, 1), std::span<const Mat>(v, 1),
                   dropout, att);
}

NodeId FusionModel::forward(Graph& g, const Bound& bound,
                            std::span<const Mat> audio_feats,
                            std::span<const Mat> visual_feats,
                            const DropoutSpec& dropout, AttentionOutputs* att) const {
    if (dropout.p < 0.0 || dropout.p >= 1.0) {
        throw ConfigError("dropout_p must be in [0,1), got " +
                          std::to_string(dropout.p));
    }
    if (audio_feats.empty() || visual_feats.empty()) {
        throw DimError("forward: empty feature list");
    }

    auto leaf_all = [&](std::span<const Mat> feats) {
        std::vector<NodeId> ids;
        ids.reserve(feats.size());
        for (const Mat& f : feats) ids.push_back(g.leaf(f, false));
        return ids;
    };

    // Resolve per-modality inputs, through the combiner when enabled.
    NodeId Xa, Xv;
    if (combiner_.enabled) {
        if (audio_feats.size() != combiner_.audio_in_dims.size() ||
            visual_feats.size() != combiner_.visual_in_dims.size()) {
            throw AlignError("forward: backbone count does not match combiner spec");
        }
        auto combine = [&](std::span<const Mat> feats, std::string_view wname) {
            auto ids = leaf_all(feats);
            NodeId cat = ids[0];
            for (std::size_t i = 1; i < ids.size(); ++i)
                cat = g.concat_cols(cat, ids[i]);
            return g.matmul(cat, param_node(bound, wname));
        };
        Xa = combine(audio_feats, "W_comb_a");
        Xv = combine(visual_feats, "W_comb_v");
    } else {
        if (audio_feats.size() != 1 || visual_feats.size() != 1) {
            throw AlignError("forward: multiple backbones require the combiner");
        }
        Xa = g.leaf(audio_feats[0], false);
        Xv = g.leaf(visual_feats[0], false);
    }

    const Mat& av = g.value(Xa);
    const Mat& vv = g.value(Xv);
    if (av.rows() != vv.rows()) {
        throw DimError("forward: clip count mismatch, audio " + av.shape_str() +
                       " vs visual " + vv.shape_str());
    }
    if (av.rows() != dims_.L || av.cols() != dims_.d_a || vv.cols() != dims_.d_v) {
        throw DimError("forward: features audio " + av.shape_str() + " visual " +
                       vv.shape_str() + " do not match model dims L=" +
                       std::to_string(dims_.L) + " d_a=" + std::to_string(dims_.d_a) +
                       " d_v=" + std::to_string(dims_.d_v));
    }

    NodeId x_hat;
    NodeId x_att_a = Xa, x_att_v = Xv;
    NodeId c_a{}, c_v{}, h_a{}, h_v{};

    switch (variant_) {
        case FusionVariant::jca: {
            NodeId J = g.concat_cols(Xa, Xv);
            c_a = joint_correlation(g, Xa, J, param_node(bound, "W_ja"), dims_.d());
            c_v = joint_correlation(g, Xv, J, param_node(bound, "W_jv"), dims_.d());
            h_a = attention_maps(g, Xa, c_a, param_node(bound, "W_a"),
                                 param_node(bound, "W_ca"));
            h_v = attention_maps(g, Xv, c_v, param_node(bound, "W_v"),
                                 param_node(bound, "W_cv"));
            x_att_a = attended_features(g, Xa, h_a, param_node(bound, "W_ha"));
            x_att_v = attended_features(g, Xv, h_v, param_node(bound, "W_hv"));
            x_hat = g.concat_cols(x_att_v, x_att_a);
            break;
        }
        case FusionVariant::ca: {
            // Correlation straight across the modalities; the divisor is the
            // width of the right-hand features.
            c_a = joint_correlation(g, Xa, Xv, param_node(bound, "W_av"), dims_.d_v);
            c_v = joint_correlation(g, Xv, Xa, param_node(bound, "W_va"), dims_.d_a);
            h_a = attention_maps(g, Xa, c_a, param_node(bound, "W_a"),
                                 param_node(bound, "W_ca"));
            h_v = attention_maps(g, Xv, c_v, param_node(bound, "W_v"),
                                 param_node(bound, "W_cv"));
            x_att_a = attended_features(g, Xa, h_a, param_node(bound, "W_ha"));
            x_att_v = attended_features(g, Xv, h_v, param_node(bound, "W_hv"));
            x_hat = g.concat_cols(x_att_v, x_att_a);
            break;
        }
        case FusionVariant::concat:
            x_hat = g.concat_cols(Xv, Xa);
            break;
        case FusionVariant::audio_only:
            x_hat = Xa;
            break;
        case FusionVariant::visual_only:
            x_hat = Xv;
            break;
    }

    if (dropout.training && dropout.p > 0.0) {
        Mat mask = dropout_mask(g.value(x_hat).rows(), g.value(x_hat).cols(),
                                dropout.p, dropout.seed);
        x_hat = g.hadamard(x_hat, g.leaf(std::move(mask), false));
    }

    NodeId h1 = g.relu(g.add_rowvec(g.matmul(x_hat, param_node(bound, "head_w1")),
                                    param_node(bound, "head_b1")));
    NodeId pred = g.add_rowvec(g.matmul(h1, param_node(bound, "head_w2")),
                               param_node(bound, "head_b2"));

    if (att != nullptr) {
        auto row_delta_norms = [&](NodeId att_node, NodeId in_node) {
            const Mat& ma = g.value(att_node);
            const Mat& mi = g.value(in_node);
            std::vector<double> scores(ma.rows(), 0.0);
            for (std::size_t r = 0; r < ma.rows(); ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c < ma.cols(); ++c) {
                    const double dlt = ma(r, c) - mi(r, c);
                    s += dlt * dlt;
                }
                scores[r] = std::sqrt(s);
            }
            return scores;
        };
        if (c_a.valid()) {
            att->C_a = g.value(c_a);
            att->C_v = g.value(c_v);
            att->H_a = g.value(h_a);
            att->H_v = g.value(h_v);
        } else {
            *att = AttentionOutputs{};
        }
        att->X_att_a = g.value(x_att_a);
        att->X_att_v = g.value(x_att_v);
        att->clip_scores_a = row_delta_norms(x_att_a, Xa);
        att->clip_scores_v = row_delta_norms(x_att_v, Xv);
    }
    return pred;
}

Mat FusionModel::predict(const Mat& X_a, const Mat& X_v, AttentionOutputs* att) const {
    const Mat* a = &X_a;
    const Mat* v = &X_v;
    return predict(std::span<const Mat>(a, 1), std::span<const Mat>(v, 1), att);
}

Mat FusionModel::predict(std::span<const Mat> audio_feats,
                         std::span<const Mat> visual_feats,
                         AttentionOutputs* att) const {
    Graph g;
    Bound b = bind(g);
    NodeId pred = forward(g, b, audio_feats, visual_feats, DropoutSpec{}, att);
    return g.value(pred);
}

ModalFeatures combine_backbones_concat_fc(std::span<const ModalFeatures> features,
                                          const Mat& weights) {
    if (features.empty()) throw DimError("combine_backbones_concat_fc: no features");
    const std::size_t L = features[0].X.rows();
    std::size_t total = 0;
    for (const auto& f : features) {
        if (f.X.rows() != L) {
            throw AlignError("combine_backbones_concat_fc: clip counts differ: " +
                             std::to_string(f.X.rows()) + " vs " + std::to_string(L));
        }
        if (f.modality != features[0].modality) {
            throw AlignError("combine_backbones_concat_fc: mixed modalities");
        }
        total += f.X.cols();
    }
    if (weights.rows() != total) {
        throw DimError("combine_backbones_concat_fc: weights " + weights.shape_str() +
                       " vs concatenated dim " + std::to_string(total));
    }
    Mat cat = features[0].X;
    for (std::size_t i = 1; i < features.size(); ++i) cat = hcat(cat, features[i].X);

    Graph g;
    NodeId out = g.matmul(g.leaf(std::move(cat), false), g.leaf(weights, false));
    return ModalFeatures{g.value(out), features[0].modality,
                         features[0].clips_per_second};
}

ModalFeatures combine_backbones_stack(std::span<const ModalFeatures> features) {
    if (features.empty()) throw DimError("combine_backbones_stack: no features");
    const std::size_t d_m = features[0].X.cols();
    for (const auto& f : features) {
        if (f.X.cols() != d_m) {
            throw DimError("combine_backbones_stack: column mismatch: " +
                           f.X.shape_str() + " vs d_m=" + std::to_string(d_m));
        }
        if (f.modality != features[0].modality) {
            throw AlignError("combine_backbones_stack: mixed modalities");
        }
    }
    Mat block = features[0].X;
    for (std::size_t i = 1; i < features.size(); ++i) block = vcat(block, features[i].X);
    return ModalFeatures{std::move(block), features[0].modality,
                         features[0].clips_per_second};
}

}  // namespace jca
