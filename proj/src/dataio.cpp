#include "jca/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "jca/errors.hpp"
#include "jca/rng.hpp"

namespace jca {

namespace {

double quantize_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& os, float f) { put_u32(os, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace

Mat AnnotationTrack::as_mat() const {
    Mat m(valence.size(), 2);
    for (std::size_t i = 0; i < valence.size(); ++i) {
        m(i, 0) = valence[i];
        m(i, 1) = arousal[i];
    }
    return m;
}

void SequenceRecord::validate() const {
    const std::size_t L = labels.size();
    if (labels.arousal.size() != L) {
        throw AlignError("record " + id + ": valence/arousal lengths differ");
    }
    if (L == 0) throw AlignError("record " + id + ": empty labels");
    for (const auto& group : {audio, visual}) {
        for (const auto& f : group) {
            if (f.X.rows() != L) {
                throw AlignError("record " + id + ": features have " +
                                 std::to_string(f.X.rows()) + " clips, labels " +
                                 std::to_string(L));
            }
            if (!f.X.all_finite()) {
                throw FormatError("record " + id + ": non-finite feature entry");
            }
        }
    }
    for (std::size_t i = 0; i < L; ++i) {
        if (std::abs(labels.valence[i]) > 1.0 || std::abs(labels.arousal[i]) > 1.0) {
            throw FormatError("record " + id + ": label outside [-1,1] at clip " +
                              std::to_string(i));
        }
    }
}

SyntheticDataset gen_synthetic(const SyntheticSpec& spec) {
    if (spec.n_sequences == 0) throw ConfigError("gen_synthetic: n_sequences == 0");
    if (spec.L == 0 || spec.d_a == 0 || spec.d_v == 0 || spec.latent_dim == 0) {
        throw ConfigError("gen_synthetic: dims must be positive");
    }
    if (spec.complementary_split < 0.0 || spec.complementary_split > 1.0) {
        throw ConfigError("gen_synthetic: complementary_split must be in [0,1]");
    }
    if (spec.noise_std < 0.0) throw ConfigError("gen_synthetic: noise_std < 0");
    if (spec.smoothness == 0) throw ConfigError("gen_synthetic: smoothness == 0");

    const std::size_t n_audio =
        static_cast<std::size_t>(std::lround(spec.complementary_split *
                                             static_cast<double>(spec.latent_dim)));
    const std::size_t n_visual = spec.latent_dim - n_audio;

    SyntheticDataset out;
    out.params.n_audio_latents = n_audio;
    out.params.label_gain = 1.5;

    const double w_scale = 1.0 / std::sqrt(static_cast<double>(spec.latent_dim));
    Rng readout_rng(mix_seed(spec.seed, 1));
    out.params.readout_valence.resize(spec.latent_dim);
    out.params.readout_arousal.resize(spec.latent_dim);
    for (auto& w : out.params.readout_valence) w = readout_rng.normal() * w_scale;
    for (auto& w : out.params.readout_arousal) w = readout_rng.normal() * w_scale;

    // Map gains keep the per-feature signal deliberately small so that
    // noise_std in the 0.1 range matters: per-clip inversion is then lossy
    // and models that pool evidence across clips and across modalities have
    // room to win. The visual gain is lower, making visual the weaker
    // channel the way one modality usually dominates in practice.
    auto random_map = [](std::size_t rows, std::size_t cols, std::uint64_t seed,
                         double gain) {
        Mat m(rows, cols);
        Rng rng(seed);
        const double scale =
            gain / std::sqrt(static_cast<double>(std::max<std::size_t>(rows, 1)));
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.normal() * scale;
        return m;
    };
    out.params.audio_map = random_map(n_audio, spec.d_a, mix_seed(spec.seed, 2), 0.12);
    out.params.visual_map =
        random_map(n_visual, spec.d_v, mix_seed(spec.seed, 3), 0.07);

    const double smooth_gain = std::sqrt(static_cast<double>(spec.smoothness));
    const int half = static_cast<int>(spec.smoothness) / 2;

    for (std::size_t s = 0; s < spec.n_sequences; ++s) {
        Rng rng(mix_seed(spec.seed, 100 + s));

        Mat raw(spec.L, spec.latent_dim);
        for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = rng.normal();

        // Centered moving average with replicate edges, rescaled so latent
        // variance stays near 1.
        Mat z(spec.L, spec.latent_dim);
        for (std::size_t l = 0; l < spec.L; ++l) {
            for (std::size_t j = 0; j < spec.latent_dim; ++j) {
                double acc = 0.0;
                for (int o = -half; o <= half; ++o) {
                    long idx = static_cast<long>(l) + o;
                    idx = std::clamp<long>(idx, 0, static_cast<long>(spec.L) - 1);
                    acc += raw(static_cast<std::size_t>(idx), j);
                }
                z(l, j) = acc / static_cast<double>(2 * half + 1) * smooth_gain;
            }
        }

        SequenceRecord rec;
        rec.id = "seq" + std::to_string(s);
        rec.labels.clips_per_second = 25.0;
        rec.labels.valence.resize(spec.L);
        rec.labels.arousal.resize(spec.L);
        for (std::size_t l = 0; l < spec.L; ++l) {
            double v = 0.0, a = 0.0;
            for (std::size_t j = 0; j < spec.latent_dim; ++j) {
                v += z(l, j) * out.params.readout_valence[j];
                a += z(l, j) * out.params.readout_arousal[j];
            }
            rec.labels.valence[l] = quantize_f32(std::tanh(v * out.params.label_gain));
            rec.labels.arousal[l] = quantize_f32(std::tanh(a * out.params.label_gain));
        }

        // Modality reliability varies per sequence: seeded fractions of the
        // sequences carry several times the base noise on one modality or
        // the other, the way real recordings have stretches of degraded
        // sound or blurred frames. How much to trust a channel is then a
        // property of the sequence that only the data itself reveals.
        const double audio_noise_mult = rng.next_double() < 0.4 ? 5.0 : 1.0;
        auto emit = [&](std::size_t lat0, std::size_t lat1, const Mat& map,
                        std::size_t d_m, Modality modality, double noise_mult) {
            const double noise = spec.noise_std * noise_mult;
            Mat x(spec.L, d_m);
            for (std::size_t l = 0; l < spec.L; ++l) {
                for (std::size_t c = 0; c < d_m; ++c) {
                    double acc = 0.0;
                    for (std::size_t j = lat0; j < lat1; ++j)
                        acc += z(l, j) * map(j - lat0, c);
                    if (noise > 0.0) acc += noise * rng.normal();
                    x(l, c) = quantize_f32(acc);
                }
            }
            return ModalFeatures{std::move(x), modality, rec.labels.clips_per_second};
        };
        rec.audio.push_back(emit(0, n_audio, out.params.audio_map, spec.d_a,
                                 Modality::audio, audio_noise_mult));
        rec.visual.push_back(emit(n_audio, spec.latent_dim, out.params.visual_map,
                                  spec.d_v, Modality::visual, 1.0));

        rec.validate();
        out.latents.push_back(std::move(z));
        out.records.push_back(std::move(rec));
    }
    return out;
}

void save_features(const std::filesystem::path& path, const ModalFeatures& features) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os.write("AVF1", 4);
    put_u32(os, static_cast<std::uint32_t>(features.X.rows()));
    put_u32(os, static_cast<std::uint32_t>(features.X.cols()));
    for (std::size_t i = 0; i < features.X.size(); ++i)
        put_f32(os, static_cast<float>(features.X[i]));
    if (!os) throw IoError("short write to " + path.string());
}

ModalFeatures load_features(const std::filesystem::path& path, Modality modality) {
    auto bytes = read_all(path);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "AVF1", 4) != 0) {
        throw FormatError(path.string() + ": bad magic at byte 0 (expected AVF1)");
    }
    if (bytes.size() < 12) {
        throw FormatError(path.string() + ": truncated header at byte " +
                          std::to_string(bytes.size()));
    }
    const std::uint32_t L = get_u32(bytes.data() + 4);
    const std::uint32_t D = get_u32(bytes.data() + 8);
    const std::size_t expected = 12 + static_cast<std::size_t>(L) * D * 4;
    if (bytes.size() != expected) {
        throw FormatError(path.string() + ": payload ends at byte " +
                          std::to_string(bytes.size()) + ", expected " +
                          std::to_string(expected) + " for L=" + std::to_string(L) +
                          " D=" + std::to_string(D));
    }
    Mat x(L, D);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const float f = get_f32(bytes.data() + 12 + i * 4);
        if (!std::isfinite(f)) {
            throw FormatError(path.string() + ": non-finite entry at byte " +
                              std::to_string(12 + i * 4));
        }
        x[i] = static_cast<double>(f);
    }
    return ModalFeatures{std::move(x), modality, 25.0};
}

void save_labels(const std::filesystem::path& path, const AnnotationTrack& labels) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os.write("AVL1", 4);
    put_u32(os, static_cast<std::uint32_t>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        put_f32(os, static_cast<float>(labels.valence[i]));
        put_f32(os, static_cast<float>(labels.arousal[i]));
    }
    if (!os) throw IoError("short write to " + path.string());
}

AnnotationTrack load_labels(const std::filesystem::path& path) {
    auto bytes = read_all(path);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "AVL1", 4) != 0) {
        throw FormatError(path.string() + ": bad magic at byte 0 (expected AVL1)");
    }
    if (bytes.size() < 8) {
        throw FormatError(path.string() + ": truncated header at byte " +
                          std::to_string(bytes.size()));
    }
    const std::uint32_t L = get_u32(bytes.data() + 4);
    const std::size_t expected = 8 + static_cast<std::size_t>(L) * 8;
    if (bytes.size() != expected) {
        throw FormatError(path.string() + ": payload ends at byte " +
                          std::to_string(bytes.size()) + ", expected " +
                          std::to_string(expected) + " for L=" + std::to_string(L));
    }
    AnnotationTrack t;
    t.valence.resize(L);
    t.arousal.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
        const float v = get_f32(bytes.data() + 8 + i * 8);
        const float a = get_f32(bytes.data() + 8 + i * 8 + 4);
        if (!std::isfinite(v) || !std::isfinite(a)) {
            throw FormatError(path.string() + ": non-finite label at byte " +
                              std::to_string(8 + i * 8));
        }
        if (std::abs(v) > 1.0f || std::abs(a) > 1.0f) {
            throw FormatError(path.string() + ": label outside [-1,1] at byte " +
                              std::to_string(8 + i * 8));
        }
        t.valence[i] = v;
        t.arousal[i] = a;
    }
    return t;
}

void save_manifest(const std::filesystem::path& path,
                   const std::vector<ManifestEntry>& entries) {
    if (entries.empty()) throw ConfigError("save_manifest: no entries");
    const std::size_t n_a = entries[0].audio_paths.size();
    const std::size_t n_v = entries[0].visual_paths.size();
    for (const auto& e : entries) {
        if (e.audio_paths.size() != n_a || e.visual_paths.size() != n_v) {
            throw AlignError("save_manifest: backbone count varies across rows");
        }
    }
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << "id";
    for (std::size_t i = 0; i < n_a; ++i)
        os << ",audio_path" << (i == 0 ? "" : std::to_string(i + 1));
    for (std::size_t i = 0; i < n_v; ++i)
        os << ",visual_path" << (i == 0 ? "" : std::to_string(i + 1));
    os << ",label_path,split\n";
    for (const auto& e : entries) {
        os << e.id;
        for (const auto& p : e.audio_paths) os << "," << p;
        for (const auto& p : e.visual_paths) os << "," << p;
        os << "," << e.label_path << "," << e.split << "\n";
    }
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path.string() + ": empty manifest");

    auto split_csv = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };

    const auto header = split_csv(line);
    std::size_t n_a = 0, n_v = 0;
    if (header.empty() || header[0] != "id") {
        throw FormatError(path.string() + ": manifest header must start with id");
    }
    std::size_t col = 1;
    while (col < header.size() && header[col].rfind("audio_path", 0) == 0) {
        ++n_a;
        ++col;
    }
    while (col < header.size() && header[col].rfind("visual_path", 0) == 0) {
        ++n_v;
        ++col;
    }
    if (n_a == 0 || n_v == 0 || col + 2 != header.size() ||
        header[col] != "label_path" || header[col + 1] != "split") {
        throw FormatError(path.string() + ": unexpected manifest header");
    }

    std::vector<ManifestEntry> entries;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) +
                              ": expected " + std::to_string(header.size()) +
                              " cells, got " + std::to_string(cells.size()));
        }
        ManifestEntry e;
        e.id = cells[0];
        for (std::size_t i = 0; i < n_a; ++i) e.audio_paths.push_back(cells[1 + i]);
        for (std::size_t i = 0; i < n_v; ++i)
            e.visual_paths.push_back(cells[1 + n_a + i]);
        e.label_path = cells[1 + n_a + n_v];
        e.split = cells[2 + n_a + n_v];
        if (e.split != "train" && e.split != "val" && e.split != "test") {
            throw FormatError(path.string() + ":" + std::to_string(lineno) +
                              ": unknown split " + e.split);
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

SequenceRecord load_record(const std::filesystem::path& manifest_dir,
                           const ManifestEntry& entry) {
    SequenceRecord rec;
    rec.id = entry.id;
    for (const auto& p : entry.audio_paths)
        rec.audio.push_back(load_features(manifest_dir / p, Modality::audio));
    for (const auto& p : entry.visual_paths)
        rec.visual.push_back(load_features(manifest_dir / p, Modality::visual));
    rec.labels = load_labels(manifest_dir / entry.label_path);
    rec.validate();
    return rec;
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
    const auto entries = load_manifest(manifest_path);
    const auto dir = manifest_path.parent_path();
    Dataset ds;
    for (const auto& e : entries) {
        SequenceRecord rec = load_record(dir, e);
        if (e.split == "train") ds.train.push_back(std::move(rec));
        else if (e.split == "val") ds.val.push_back(std::move(rec));
        else ds.test.push_back(std::move(rec));
    }
    return ds;
}

std::vector<SequenceRecord> window_sequence(const SequenceRecord& record,
                                            std::size_t sub_len, std::size_t stride) {
    const std::size_t L = record.clip_count();
    if (sub_len < 1 || sub_len > L) {
        throw ConfigError("window_sequence: sub_len " + std::to_string(sub_len) +
                          " out of range for L=" + std::to_string(L));
    }
    if (stride < 1) throw ConfigError("window_sequence: stride must be >= 1");

    std::vector<SequenceRecord> windows;
    for (std::size_t start = 0; start + sub_len <= L; start += stride) {
        SequenceRecord w;
        w.id = record.id + "#" + std::to_string(start);
        w.labels.clips_per_second = record.labels.clips_per_second;
        w.labels.valence.assign(record.labels.valence.begin() + start,
                                record.labels.valence.begin() + start + sub_len);
        w.labels.arousal.assign(record.labels.arousal.begin() + start,
                                record.labels.arousal.begin() + start + sub_len);
        for (const auto& f : record.audio)
            w.audio.push_back(ModalFeatures{f.X.slice_rows(start, start + sub_len),
                                            f.modality, f.clips_per_second});
        for (const auto& f : record.visual)
            w.visual.push_back(ModalFeatures{f.X.slice_rows(start, start + sub_len),
                                             f.modality, f.clips_per_second});
        windows.push_back(std::move(w));
    }
    return windows;
}

std::vector<SequenceRecord> window_sequence(const SequenceRecord& record,
                                            std::size_t sub_len) {
    return window_sequence(record, sub_len, sub_len);
}

std::vector<TrainItem> to_train_items(const std::vector<SequenceRecord>& records,
                                      std::size_t sub_len, std::size_t stride) {
    std::vector<TrainItem> items;
    for (const auto& rec : records) {
        for (auto& w : window_sequence(rec, sub_len, stride)) {
            TrainItem item;
            item.sequence_id = rec.id;
            item.offset = std::stoul(w.id.substr(w.id.find('#') + 1));
            for (auto& f : w.audio) item.audio.push_back(std::move(f.X));
            for (auto& f : w.visual) item.visual.push_back(std::move(f.X));
            item.labels = w.labels.as_mat();
            items.push_back(std::move(item));
        }
    }
    return items;
}

SequenceRecord mask_modality(const SequenceRecord& record, Modality which,
                             const MaskSpec& mask) {
    if (mask.fraction < 0.0 || mask.fraction > 1.0) {
        throw ConfigError("mask_modality: fraction must be in [0,1]");
    }
    SequenceRecord out = record;
    const std::size_t L = record.clip_count();
    const std::size_t n_masked = static_cast<std::size_t>(
        std::lround(mask.fraction * static_cast<double>(L)));
    if (n_masked == 0) return out;

    // Seeded partial Fisher-Yates: first n_masked entries of a shuffled
    // index range.
    std::vector<std::size_t> idx(L);
    for (std::size_t i = 0; i < L; ++i) idx[i] = i;
    Rng rng(mask.seed);
    for (std::size_t i = 0; i < n_masked; ++i) {
        const std::size_t j = i + rng.below(L - i);
        std::swap(idx[i], idx[j]);
    }

    Rng fill_rng(mix_seed(mask.seed, 0xF111));
    auto& group = which == Modality::audio ? out.audio : out.visual;
    for (auto& f : group) {
        for (std::size_t i = 0; i < n_masked; ++i) {
            double* row = f.X.row(idx[i]);
            for (std::size_t c = 0; c < f.X.cols(); ++c) {
                row[c] = mask.fill == MaskFill::zeros
                             ? 0.0
                             : quantize_f32(fill_rng.normal());
            }
        }
    }
    return out;
}

}  // namespace jca
