#include "jca/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "jca/errors.hpp"

namespace jca {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double d) {
    const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

struct Reader {
    const std::vector<unsigned char>& bytes;
    std::size_t pos = 0;
    std::string where;

    void need(std::size_t n) const {
        if (pos + n > bytes.size()) {
            throw FormatError(where + ": truncated at byte " + std::to_string(pos) +
                              " (need " + std::to_string(n) + " more, have " +
                              std::to_string(bytes.size() - pos) + ")");
        }
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(bytes[pos + static_cast<std::size_t>(i)])
                 << (8 * i);
        pos += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(bytes[pos + static_cast<std::size_t>(i)])
                 << (8 * i);
        pos += 8;
        return std::bit_cast<double>(v);
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
        pos += n;
        return s;
    }
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const FusionModel& model) {
    nlohmann::json header;
    header["variant"] = to_string(model.variant());
    header["L"] = model.dims().L;
    header["d_a"] = model.dims().d_a;
    header["d_v"] = model.dims().d_v;
    header["k"] = model.dims().k;
    header["h_head"] = model.dims().h_head;
    header["combiner"] = {{"enabled", model.combiner().enabled},
                          {"audio_in_dims", model.combiner().audio_in_dims},
                          {"visual_in_dims", model.combiner().visual_in_dims}};
    header["n_params"] = model.params().size();
    const std::string htext = header.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os.write("AVC1", 4);
    put_u32(os, static_cast<std::uint32_t>(htext.size()));
    os.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    for (const auto& p : model.params()) {
        put_u32(os, static_cast<std::uint32_t>(p.name.size()));
        os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        put_u32(os, static_cast<std::uint32_t>(p.value.rows()));
        put_u32(os, static_cast<std::uint32_t>(p.value.cols()));
        for (std::size_t i = 0; i < p.value.size(); ++i) put_f64(os, p.value[i]);
    }
    if (!os) throw IoError("short write to " + path.string());
}

FusionModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "AVC1", 4) != 0) {
        throw CheckpointError(path.string() + ": bad magic (expected AVC1)");
    }
    Reader r{bytes, 4, path.string()};
    const std::uint32_t hlen = r.u32();
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(r.str(hlen));
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(path.string() + ": bad header: " + e.what());
    }

    ModelDims dims;
    dims.L = header.at("L").get<std::size_t>();
    dims.d_a = header.at("d_a").get<std::size_t>();
    dims.d_v = header.at("d_v").get<std::size_t>();
    dims.k = header.at("k").get<std::size_t>();
    dims.h_head = header.at("h_head").get<std::size_t>();
    CombinerSpec combiner;
    combiner.enabled = header.at("combiner").at("enabled").get<bool>();
    combiner.audio_in_dims =
        header.at("combiner").at("audio_in_dims").get<std::vector<std::size_t>>();
    combiner.visual_in_dims =
        header.at("combiner").at("visual_in_dims").get<std::vector<std::size_t>>();

    const auto n_params = header.at("n_params").get<std::size_t>();
    std::vector<NamedParam> params;
    params.reserve(n_params);
    for (std::size_t i = 0; i < n_params; ++i) {
        const std::uint32_t name_len = r.u32();
        std::string name = r.str(name_len);
        const std::uint32_t rows = r.u32();
        const std::uint32_t cols = r.u32();
        Mat m(rows, cols);
        for (std::size_t j = 0; j < m.size(); ++j) m[j] = r.f64();
        params.push_back({std::move(name), std::move(m)});
    }
    if (r.pos != bytes.size()) {
        throw FormatError(path.string() + ": trailing bytes at " +
                          std::to_string(r.pos));
    }
    return FusionModel::from_params(fusion_variant_from(header.at("variant").get<std::string>()),
                                    dims, std::move(params), combiner);
}

}  // namespace jca
