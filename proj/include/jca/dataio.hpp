#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jca/fusion.hpp"
#include "jca/mat.hpp"
#include "jca/optim.hpp"

namespace jca {

// Per-clip valence/arousal ground truth, both in [-1, 1].
struct AnnotationTrack {
    std::vector<double> valence;
    std::vector<double> arousal;
    double clips_per_second = 25.0;

    std::size_t size() const { return valence.size(); }
    Mat as_mat() const;  // L x 2
};

// One clip sequence: features (possibly several backbones per modality) and
// aligned labels, all sharing the clip count L.
struct SequenceRecord {
    std::string id;
    std::vector<ModalFeatures> audio;
    std::vector<ModalFeatures> visual;
    AnnotationTrack labels;

    std::size_t clip_count() const { return labels.size(); }
    void validate() const;  // shared-L and label-range invariants
};

// Synthetic complementary-modality generator. Labels are bounded tanh
// readouts of the full latent trajectory; audio features see only the first
// round(complementary_split * latent_dim) latent dims and visual features the
// rest, so neither modality alone determines the labels but the pair does.
struct SyntheticSpec {
    std::size_t n_sequences = 64;
    std::size_t L = 16;           // clips per sequence
    std::size_t d_a = 512;
    std::size_t d_v = 512;
    std::size_t latent_dim = 8;
    double noise_std = 0.1;
    double complementary_split = 0.5;  // fraction of latent dims audio-only
    std::size_t smoothness = 5;        // moving-average window on latents
    std::uint64_t seed = 1;
};

struct GeneratorParams {
    std::vector<double> readout_valence;  // latent_dim
    std::vector<double> readout_arousal;
    Mat audio_map;   // n_audio_latents x d_a
    Mat visual_map;  // (latent_dim - n_audio_latents) x d_v
    std::size_t n_audio_latents = 0;
    double label_gain = 0.0;
};

struct SyntheticDataset {
    std::vector<SequenceRecord> records;
    std::vector<Mat> latents;  // per record, L x latent_dim
    GeneratorParams params;
};

SyntheticDataset gen_synthetic(const SyntheticSpec& spec);

// AVF1 feature file: magic "AVF1", u32 L, u32 D, then L*D float32 row-major,
// all little-endian. AVL1 label file: magic "AVL1", u32 L, then L (valence,
// arousal) float32 pairs.
void save_features(const std::filesystem::path& path, const ModalFeatures& features);
ModalFeatures load_features(const std::filesystem::path& path, Modality modality);

void save_labels(const std::filesystem::path& path, const AnnotationTrack& labels);
AnnotationTrack load_labels(const std::filesystem::path& path);

// Manifest CSV: id, audio_path[,audio_path2...], visual_path[,...],
// label_path, split. Paths are stored relative to the manifest.
struct ManifestEntry {
    std::string id;
    std::vector<std::string> audio_paths;
    std::vector<std::string> visual_paths;
    std::string label_path;
    std::string split;  // train | val | test
};

void save_manifest(const std::filesystem::path& path,
                   const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

struct Dataset {
    std::vector<SequenceRecord> train, val, test;
};

SequenceRecord load_record(const std::filesystem::path& manifest_dir,
                           const ManifestEntry& entry);
Dataset load_dataset(const std::filesystem::path& manifest_path);

// Non-overlapping by default (stride == sub_len); a trailing remainder
// shorter than sub_len is dropped.
std::vector<SequenceRecord> window_sequence(const SequenceRecord& record,
                                            std::size_t sub_len, std::size_t stride);
std::vector<SequenceRecord> window_sequence(const SequenceRecord& record,
                                            std::size_t sub_len);

std::vector<TrainItem> to_train_items(const std::vector<SequenceRecord>& records,
                                      std::size_t sub_len, std::size_t stride);

enum class MaskFill { zeros, gaussian_noise };

struct MaskSpec {
    double fraction = 0.0;        // of clips, rounded to the nearest count
    MaskFill fill = MaskFill::zeros;
    std::uint64_t seed = 0;
};

// Replaces a seeded uniformly-random subset of exactly round(fraction * L)
// clips of the chosen modality (all its backbones) with the fill pattern;
// labels are untouched.
SequenceRecord mask_modality(const SequenceRecord& record, Modality which,
                             const MaskSpec& mask);

}  // namespace jca
