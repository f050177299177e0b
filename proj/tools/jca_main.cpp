// Command-line front end: synthetic data generation, training, evaluation,
// ablation, missing-audio robustness curves, and attention-score dumps. Every
// command is a pure function of (config, flags, seed, input files); outputs
// land in --out together with the fully resolved configuration.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jca/ccc.hpp"
#include "jca/checkpoint.hpp"
#include "jca/dataio.hpp"
#include "jca/errors.hpp"
#include "jca/fusion.hpp"
#include "jca/log.hpp"
#include "jca/optim.hpp"
#include "jca/postprocess.hpp"
#include "jca/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw jca::IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw jca::ConfigError(path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw jca::IoError("cannot write " + path.string());
    os << text;
}

jca::SyntheticSpec spec_from_json(const json& j) {
    jca::SyntheticSpec spec;
    spec.n_sequences = j.value("n_sequences", spec.n_sequences);
    spec.L = j.value("L", spec.L);
    spec.d_a = j.value("d_a", spec.d_a);
    spec.d_v = j.value("d_v", spec.d_v);
    spec.latent_dim = j.value("latent_dim", spec.latent_dim);
    spec.noise_std = j.value("noise_std", spec.noise_std);
    spec.complementary_split = j.value("complementary_split", spec.complementary_split);
    spec.smoothness = j.value("smoothness", spec.smoothness);
    spec.seed = j.value("seed", spec.seed);
    return spec;
}

json spec_to_json(const jca::SyntheticSpec& s) {
    return json{{"n_sequences", s.n_sequences},
                {"L", s.L},
                {"d_a", s.d_a},
                {"d_v", s.d_v},
                {"latent_dim", s.latent_dim},
                {"noise_std", s.noise_std},
                {"complementary_split", s.complementary_split},
                {"smoothness", s.smoothness},
                {"seed", s.seed}};
}

// Everything cmd_train / cmd_ablate need, merged from the config file and
// command-line overrides.
struct RunConfig {
    fs::path manifest;
    std::string variant = "jca";
    std::size_t window = 16;
    std::size_t stride = 0;  // training-window stride; 0 means non-overlapping
    std::size_t k = 32;
    std::size_t h_head = 128;
    jca::TrainConfig train;
    std::string combiner = "single";  // single | concat_fc | stack
    std::size_t combiner_out_dim_a = 0;
    std::size_t combiner_out_dim_v = 0;

    static RunConfig from_json(const json& j, const fs::path& config_dir) {
        RunConfig cfg;
        if (!j.contains("manifest")) {
            throw jca::ConfigError("config: missing \"manifest\"");
        }
        fs::path m = j.at("manifest").get<std::string>();
        cfg.manifest = m.is_absolute() ? m : config_dir / m;
        cfg.variant = j.value("variant", cfg.variant);
        if (j.contains("model")) {
            const json& jm = j.at("model");
            cfg.window = jm.value("window", cfg.window);
            cfg.stride = jm.value("stride", cfg.stride);
            cfg.k = jm.value("k", cfg.k);
            cfg.h_head = jm.value("h_head", cfg.h_head);
        }
        if (j.contains("train")) {
            const json& jt = j.at("train");
            cfg.train.learning_rate = jt.value("learning_rate", cfg.train.learning_rate);
            cfg.train.batch_size = jt.value("batch_size", cfg.train.batch_size);
            cfg.train.max_epochs = jt.value("max_epochs", cfg.train.max_epochs);
            cfg.train.patience = jt.value("patience", cfg.train.patience);
            cfg.train.weight_decay = jt.value("weight_decay", cfg.train.weight_decay);
            cfg.train.dropout_p = jt.value("dropout", cfg.train.dropout_p);
            cfg.train.seed = jt.value("seed", cfg.train.seed);
            const std::string opt = jt.value("optimizer", std::string("adam"));
            if (opt == "adam") cfg.train.optimizer = jca::OptimKind::adam;
            else if (opt == "sgd") cfg.train.optimizer = jca::OptimKind::sgd;
            else throw jca::ConfigError("config: unknown optimizer " + opt);
        }
        if (j.contains("combiner")) {
            const json& jc = j.at("combiner");
            cfg.combiner = jc.value("mode", cfg.combiner);
            cfg.combiner_out_dim_a = jc.value("out_dim_a", cfg.combiner_out_dim_a);
            cfg.combiner_out_dim_v = jc.value("out_dim_v", cfg.combiner_out_dim_v);
            if (cfg.combiner != "single" && cfg.combiner != "concat_fc" &&
                cfg.combiner != "stack") {
                throw jca::ConfigError("config: unknown combiner mode " + cfg.combiner);
            }
        }
        return cfg;
    }

    json to_json() const {
        return json{
            {"manifest", manifest.string()},
            {"variant", variant},
            {"model",
             {{"window", window},
              {"stride", stride == 0 ? window : stride},
              {"k", k},
              {"h_head", h_head}}},
            {"train",
             {{"learning_rate", train.learning_rate},
              {"batch_size", train.batch_size},
              {"max_epochs", train.max_epochs},
              {"patience", train.patience},
              {"weight_decay", train.weight_decay},
              {"dropout", train.dropout_p},
              {"seed", train.seed},
              {"optimizer", train.optimizer == jca::OptimKind::adam ? "adam" : "sgd"},
              {"threads", train.threads}}},
            {"combiner",
             {{"mode", combiner},
              {"out_dim_a", combiner_out_dim_a},
              {"out_dim_v", combiner_out_dim_v}}}};
    }
};

// Applies the stack combiner at the record level: per modality the backbone
// blocks are stacked clip-wise, and the labels are tiled to match. Requires
// the same backbone count on both sides so the clip counts stay aligned.
jca::SequenceRecord stack_record(const jca::SequenceRecord& rec) {
    if (rec.audio.size() != rec.visual.size()) {
        throw jca::AlignError(
            "stack combiner needs equal backbone counts per modality; record " +
            rec.id + " has " + std::to_string(rec.audio.size()) + " audio and " +
            std::to_string(rec.visual.size()) + " visual");
    }
    jca::SequenceRecord out;
    out.id = rec.id;
    out.audio.push_back(jca::combine_backbones_stack(rec.audio));
    out.visual.push_back(jca::combine_backbones_stack(rec.visual));
    const std::size_t copies = rec.audio.size();
    out.labels.clips_per_second = rec.labels.clips_per_second;
    for (std::size_t c = 0; c < copies; ++c) {
        out.labels.valence.insert(out.labels.valence.end(), rec.labels.valence.begin(),
                                  rec.labels.valence.end());
        out.labels.arousal.insert(out.labels.arousal.end(), rec.labels.arousal.begin(),
                                  rec.labels.arousal.end());
    }
    return out;
}

struct PreparedData {
    std::vector<jca::TrainItem> train, val, test;
    std::size_t d_a = 0, d_v = 0;          // model-facing dims
    jca::CombinerSpec combiner;            // enabled iff concat_fc
};

PreparedData prepare(const jca::Dataset& ds, const RunConfig& cfg) {
    PreparedData out;
    const jca::SequenceRecord* probe =
        !ds.train.empty() ? &ds.train.front()
                          : (!ds.val.empty() ? &ds.val.front() : nullptr);
    if (probe == nullptr) throw jca::ConfigError("manifest has no train/val rows");

    auto items = [&](const std::vector<jca::SequenceRecord>& recs,
                     std::size_t stride) {
        if (cfg.combiner == "stack") {
            std::vector<jca::SequenceRecord> stacked;
            stacked.reserve(recs.size());
            for (const auto& r : recs) stacked.push_back(stack_record(r));
            return jca::to_train_items(stacked, cfg.window, stride);
        }
        return jca::to_train_items(recs, cfg.window, stride);
    };
    // Overlapping windows only ever augment training; evaluation stays on
    // non-overlapping windows so no clip is scored twice.
    out.train = items(ds.train, cfg.stride == 0 ? cfg.window : cfg.stride);
    out.val = items(ds.val, cfg.window);
    out.test = items(ds.test, cfg.window);

    if (cfg.combiner == "concat_fc") {
        out.combiner.enabled = true;
        for (const auto& f : probe->audio) out.combiner.audio_in_dims.push_back(f.X.cols());
        for (const auto& f : probe->visual)
            out.combiner.visual_in_dims.push_back(f.X.cols());
        out.d_a = cfg.combiner_out_dim_a != 0 ? cfg.combiner_out_dim_a
                                              : probe->audio.front().X.cols();
        out.d_v = cfg.combiner_out_dim_v != 0 ? cfg.combiner_out_dim_v
                                              : probe->visual.front().X.cols();
    } else {
        const auto& sample = !out.train.empty() ? out.train.front() : out.val.front();
        if (sample.audio.size() != 1 || sample.visual.size() != 1) {
            throw jca::ConfigError(
                "multiple backbones per modality need combiner mode concat_fc or stack");
        }
        out.d_a = sample.audio[0].cols();
        out.d_v = sample.visual[0].cols();
    }
    return out;
}

void write_metrics_csv(const fs::path& path, const jca::TrainResult& result) {
    std::ofstream os(path);
    if (!os) throw jca::IoError("cannot write " + path.string());
    os << "epoch,train_loss,val_ccc_valence,val_ccc_arousal\n";
    for (const auto& row : result.history) {
        os << row.epoch << "," << fmt17(row.train_loss) << ","
           << fmt17(row.val_ccc_valence) << "," << fmt17(row.val_ccc_arousal) << "\n";
    }
}

jca::FusionModel train_one(const RunConfig& cfg, const PreparedData& data,
                           const std::string& variant, jca::TrainResult* result_out) {
    jca::ModelDims dims{cfg.window, data.d_a, data.d_v, cfg.k, cfg.h_head};
    auto model = jca::FusionModel::init(jca::fusion_variant_from(variant), dims,
                                        cfg.train.seed, data.combiner);
    auto result = jca::train_loop(model, data.train, data.val, cfg.train);
    jca::log::info(variant + ": best epoch " + std::to_string(result.best_epoch) +
                   ", val mean CCC " + fmt17(result.best_val_ccc_mean));
    if (result_out != nullptr) *result_out = std::move(result);
    return model;
}

// Default post-processing grids, discretized at the clip granularity: odd
// median windows spanning sub-second to tens of seconds, shifts from none to
// the annotation-delay range, both capped by the track length.
std::vector<std::size_t> default_windows(std::size_t n) {
    std::vector<std::size_t> w;
    for (std::size_t v : {1u, 3u, 5u, 7u, 9u, 11u, 15u, 21u, 31u, 51u, 101u, 251u,
                          501u})
        if (v <= n) w.push_back(v);
    return w;
}

std::vector<std::size_t> default_shifts(std::size_t n) {
    std::vector<std::size_t> s;
    const std::size_t cap = std::min<std::size_t>(n >= 4 ? n / 4 : 0, 25);
    for (std::size_t v = 0; v <= cap; ++v) s.push_back(v);
    return s;
}

struct EvalReport {
    jca::CccReport raw_valence, raw_arousal;
    std::optional<jca::CccReport> pp_valence, pp_arousal;
    jca::PostprocChain chain_valence, chain_arousal;
};

EvalReport evaluate(const jca::FusionModel& model, const PreparedData& data,
                    std::span<const jca::TrainItem> eval_items, bool postproc,
                    int threads) {
    EvalReport rep;
    jca::Mat pred = jca::predict_all(model, eval_items, threads);
    jca::Mat gt = jca::labels_all(eval_items);
    rep.raw_valence = jca::ccc(pred.col(0), gt.col(0));
    rep.raw_arousal = jca::ccc(pred.col(1), gt.col(1));

    if (postproc) {
        jca::Mat val_pred = jca::predict_all(model, data.val, threads);
        jca::Mat val_gt = jca::labels_all(data.val);
        const auto windows = default_windows(val_pred.rows());
        const auto shifts = default_shifts(val_pred.rows());
        auto fit = [&](std::size_t col) {
            return jca::grid_search_postproc(val_pred.col(col), val_gt.col(col),
                                             windows, shifts)
                .chain;
        };
        rep.chain_valence = fit(0);
        rep.chain_arousal = fit(1);
        rep.pp_valence = jca::ccc_after(rep.chain_valence, pred.col(0), gt.col(0));
        rep.pp_arousal = jca::ccc_after(rep.chain_arousal, pred.col(1), gt.col(1));
    }
    return rep;
}

json report_to_json(const EvalReport& rep, const std::string& split) {
    auto target = [](const jca::CccReport& raw,
                     const std::optional<jca::CccReport>& pp) {
        json j{{"raw", raw.degenerate ? 0.0 : raw.rho_c}};
        if (pp.has_value()) j["postproc"] = pp->degenerate ? 0.0 : pp->rho_c;
        return j;
    };
    json j{{"split", split},
           {"valence", target(rep.raw_valence, rep.pp_valence)},
           {"arousal", target(rep.raw_arousal, rep.pp_arousal)}};
    if (rep.pp_valence.has_value()) {
        auto chain = [](const jca::PostprocChain& c) {
            return json{{"median_window", c.median_window},
                        {"bias", c.bias},
                        {"scale", c.scale},
                        {"shift", c.shift}};
        };
        j["postproc_chain"] = {{"valence", chain(rep.chain_valence)},
                               {"arousal", chain(rep.chain_arousal)}};
    }
    return j;
}

std::span<const jca::TrainItem> pick_split(const PreparedData& data,
                                           const std::string& split) {
    if (split == "train") return data.train;
    if (split == "val") return data.val;
    if (split == "test") return data.test;
    throw jca::ConfigError("unknown split " + split);
}

// ---- commands -------------------------------------------------------------

int cmd_gen_data(const fs::path& spec_path, const fs::path& out_dir) {
    const jca::SyntheticSpec spec = spec_from_json(load_json(spec_path));
    auto data = jca::gen_synthetic(spec);

    fs::create_directories(out_dir / "features");
    std::vector<jca::ManifestEntry> entries;
    const std::size_t n = data.records.size();
    const std::size_t n_train = static_cast<std::size_t>(0.7 * static_cast<double>(n));
    const std::size_t n_val = static_cast<std::size_t>(0.15 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& rec = data.records[i];
        jca::ManifestEntry e;
        e.id = rec.id;
        e.audio_paths = {"features/" + rec.id + "_a.avf"};
        e.visual_paths = {"features/" + rec.id + "_v.avf"};
        e.label_path = "features/" + rec.id + ".avl";
        e.split = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
        jca::save_features(out_dir / e.audio_paths[0], rec.audio[0]);
        jca::save_features(out_dir / e.visual_paths[0], rec.visual[0]);
        jca::save_labels(out_dir / e.label_path, rec.labels);
        entries.push_back(std::move(e));
    }
    jca::save_manifest(out_dir / "manifest.csv", entries);
    write_text(out_dir / "spec.json", spec_to_json(spec).dump(2) + "\n");

    std::size_t n_test = n - n_train - n_val;
    std::cout << "generated " << n << " sequences (L=" << spec.L
              << ", d_a=" << spec.d_a << ", d_v=" << spec.d_v << ") -> "
              << (out_dir / "manifest.csv").string() << "\n"
              << "splits: train=" << n_train << " val=" << n_val
              << " test=" << n_test << "\n";
    return 0;
}

int cmd_train(RunConfig cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    auto ds = jca::load_dataset(cfg.manifest);
    auto data = prepare(ds, cfg);
    jca::log::info("train: " + std::to_string(data.train.size()) + " windows, val: " +
                   std::to_string(data.val.size()));

    jca::TrainResult result;
    auto model = train_one(cfg, data, cfg.variant, &result);

    write_metrics_csv(out_dir / "metrics.csv", result);
    jca::save_checkpoint(out_dir / "checkpoint.avck", model);
    write_text(out_dir / "config.json", cfg.to_json().dump(2) + "\n");
    std::cout << "best epoch " << result.best_epoch << " val mean CCC "
              << fmt17(result.best_val_ccc_mean) << "\n";
    return 0;
}

int cmd_eval(const fs::path& checkpoint, RunConfig cfg, const std::string& split,
             bool postproc, const fs::path& out_dir) {
    auto model = jca::load_checkpoint(checkpoint);
    cfg.window = model.dims().L;
    if (model.combiner().enabled) cfg.combiner = "concat_fc";
    auto ds = jca::load_dataset(cfg.manifest);
    auto data = prepare(ds, cfg);
    if (data.d_a != model.dims().d_a || data.d_v != model.dims().d_v) {
        throw jca::CheckpointError(
            "checkpoint dims (d_a=" + std::to_string(model.dims().d_a) +
            ", d_v=" + std::to_string(model.dims().d_v) +
            ") do not match the manifest features (d_a=" + std::to_string(data.d_a) +
            ", d_v=" + std::to_string(data.d_v) + ")");
    }

    auto rep = evaluate(model, data, pick_split(data, split), postproc,
                        cfg.train.threads);
    const json j = report_to_json(rep, split);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text(out_dir / "eval.json", j.dump(2) + "\n");
        if (postproc) {
            jca::save_chain(out_dir / "chain_valence.txt", rep.chain_valence);
            jca::save_chain(out_dir / "chain_arousal.txt", rep.chain_arousal);
        }
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_ablate(RunConfig cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    auto ds = jca::load_dataset(cfg.manifest);
    auto data = prepare(ds, cfg);

    std::ofstream os(out_dir / "ablation.csv");
    if (!os) throw jca::IoError("cannot write " + (out_dir / "ablation.csv").string());
    os << "variant,val_ccc_valence,val_ccc_arousal\n";
    for (const char* variant :
         {"audio_only", "visual_only", "concat", "ca", "jca"}) {
        auto model = train_one(cfg, data, variant, nullptr);
        auto val = jca::evaluate_ccc(model, data.val, cfg.train.threads);
        os << variant << ","
           << fmt17(val.valence.degenerate ? 0.0 : val.valence.rho_c) << ","
           << fmt17(val.arousal.degenerate ? 0.0 : val.arousal.rho_c) << "\n";
        jca::save_checkpoint(out_dir / (std::string("checkpoint_") + variant + ".avck"),
                             model);
    }
    write_text(out_dir / "config.json", cfg.to_json().dump(2) + "\n");
    std::cout << "ablation table written to " << (out_dir / "ablation.csv").string()
              << "\n";
    return 0;
}

int cmd_mask_audio(const fs::path& checkpoint, RunConfig cfg,
                   const std::vector<double>& fractions, const std::string& split,
                   const fs::path& out_dir) {
    auto model = jca::load_checkpoint(checkpoint);
    cfg.window = model.dims().L;
    if (model.combiner().enabled) cfg.combiner = "concat_fc";
    auto ds = jca::load_dataset(cfg.manifest);

    const std::vector<jca::SequenceRecord>* records = nullptr;
    if (split == "train") records = &ds.train;
    else if (split == "val") records = &ds.val;
    else if (split == "test") records = &ds.test;
    else throw jca::ConfigError("unknown split " + split);

    fs::create_directories(out_dir);
    std::ofstream os(out_dir / "mask_audio.csv");
    if (!os) throw jca::IoError("cannot write " + (out_dir / "mask_audio.csv").string());
    os << "fraction,ccc_valence,ccc_arousal,ccc_mean\n";
    for (double fraction : fractions) {
        if (fraction < 0.0 || fraction > 1.0) {
            throw jca::ConfigError("fraction " + std::to_string(fraction) +
                                   " outside [0,1]");
        }
        std::vector<jca::SequenceRecord> masked;
        masked.reserve(records->size());
        for (std::size_t i = 0; i < records->size(); ++i) {
            jca::MaskSpec ms{fraction, jca::MaskFill::zeros,
                             jca::mix_seed(cfg.train.seed, i)};
            masked.push_back(jca::mask_modality((*records)[i], jca::Modality::audio, ms));
        }
        auto items = jca::to_train_items(masked, cfg.window, cfg.window);
        auto val = jca::evaluate_ccc(model, items, cfg.train.threads);
        const double v = val.valence.degenerate ? 0.0 : val.valence.rho_c;
        const double a = val.arousal.degenerate ? 0.0 : val.arousal.rho_c;
        os << fmt17(fraction) << "," << fmt17(v) << "," << fmt17(a) << ","
           << fmt17(0.5 * (v + a)) << "\n";
        jca::log::info("fraction " + fmt17(fraction) + ": mean CCC " +
                       fmt17(0.5 * (v + a)));
    }
    std::cout << "curve written to " << (out_dir / "mask_audio.csv").string() << "\n";
    return 0;
}

int cmd_dump_attention(const fs::path& checkpoint, RunConfig cfg,
                       const std::string& sequence_id, const fs::path& out_path) {
    auto model = jca::load_checkpoint(checkpoint);
    cfg.window = model.dims().L;
    if (model.combiner().enabled) cfg.combiner = "concat_fc";
    auto ds = jca::load_dataset(cfg.manifest);

    const jca::SequenceRecord* rec = nullptr;
    for (const auto* group : {&ds.train, &ds.val, &ds.test}) {
        for (const auto& r : *group)
            if (r.id == sequence_id) rec = &r;
    }
    if (rec == nullptr) {
        throw jca::LookupError("sequence id " + sequence_id + " not in manifest");
    }

    std::vector<jca::SequenceRecord> one{cfg.combiner == "stack" ? stack_record(*rec)
                                                                 : *rec};
    auto items = jca::to_train_items(one, cfg.window, cfg.window);
    if (items.empty()) {
        throw jca::ConfigError("sequence " + sequence_id + " is shorter than the model window");
    }

    std::ofstream os(out_path);
    if (!os) throw jca::IoError("cannot write " + out_path.string());
    os << "clip_index,score_audio,score_visual,valence_pred,arousal_pred,"
          "valence_gt,arousal_gt\n";
    for (const auto& item : items) {
        jca::AttentionOutputs att;
        jca::Mat pred = model.predict(item.audio, item.visual, &att);
        for (std::size_t l = 0; l < pred.rows(); ++l) {
            os << item.offset + l << "," << fmt17(att.clip_scores_a[l]) << ","
               << fmt17(att.clip_scores_v[l]) << "," << fmt17(pred(l, 0)) << ","
               << fmt17(pred(l, 1)) << "," << fmt17(item.labels(l, 0)) << ","
               << fmt17(item.labels(l, 1)) << "\n";
        }
    }
    std::cout << "attention scores written to " << out_path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint cross-attention audio-visual fusion"};
    app.require_subcommand(1);

    std::string config_path, out_dir, checkpoint, split = "test", sequence_id;
    std::string variant_override, fractions_csv;
    std::int64_t seed_override = -1;
    int threads = 1;
    bool postproc = false;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "run configuration JSON");
        if (needs_config) opt->required();
        cmd->add_option("--seed", seed_override, "override the config seed");
        cmd->add_option("--threads", threads, "evaluation threads (default 1)");
        return cmd;
    };

    auto* gen = app.add_subcommand("gen-data", "materialize a synthetic dataset");
    std::string spec_path;
    gen->add_option("--spec", spec_path, "synthetic spec JSON")->required();
    gen->add_option("--out", out_dir, "output directory")->required();

    auto* train = add_common(
        app.add_subcommand("train", "train one fusion variant"), true);
    train->add_option("--out", out_dir, "output directory")->required();
    train->add_option("--variant", variant_override, "jca | ca | concat");

    auto* eval = add_common(app.add_subcommand("eval", "evaluate a checkpoint"), true);
    eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    eval->add_option("--split", split, "train | val | test (default test)");
    eval->add_flag("--postproc", postproc,
                   "fit the post-processing chain on val and apply it");
    eval->add_option("--out", out_dir, "where to write eval.json and chains");

    auto* ablate = add_common(
        app.add_subcommand("ablate", "train and compare all fusion variants"), true);
    ablate->add_option("--out", out_dir, "output directory")->required();

    auto* mask = add_common(
        app.add_subcommand("mask-audio", "missing-audio degradation curve"), true);
    mask->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    mask->add_option("--fractions", fractions_csv,
                     "comma-separated fractions (default 0,0.1,0.25,0.5,1.0)");
    mask->add_option("--split", split, "train | val | test (default test)");
    mask->add_option("--out", out_dir, "output directory")->required();

    auto* dump = add_common(
        app.add_subcommand("dump-attention", "per-clip attention scores"), true);
    dump->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    dump->add_option("--sequence", sequence_id, "sequence id")->required();
    dump->add_option("--out", out_dir, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(spec_path, out_dir);

        RunConfig cfg = RunConfig::from_json(load_json(config_path),
                                             fs::path(config_path).parent_path());
        if (seed_override >= 0)
            cfg.train.seed = static_cast<std::uint64_t>(seed_override);
        if (!variant_override.empty()) cfg.variant = variant_override;
        cfg.train.threads = threads;

        if (train->parsed()) return cmd_train(cfg, out_dir);
        if (eval->parsed()) return cmd_eval(checkpoint, cfg, split, postproc, out_dir);
        if (ablate->parsed()) return cmd_ablate(cfg, out_dir);
        if (mask->parsed()) {
            std::vector<double> fractions{0.0, 0.1, 0.25, 0.5, 1.0};
            if (!fractions_csv.empty()) {
                fractions.clear();
                std::stringstream ss(fractions_csv);
                std::string cell;
                while (std::getline(ss, cell, ',')) fractions.push_back(std::stod(cell));
            }
            return cmd_mask_audio(checkpoint, cfg, fractions, split, out_dir);
        }
        if (dump->parsed())
            return cmd_dump_attention(checkpoint, cfg, sequence_id, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
