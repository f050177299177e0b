#include "jca/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "jca/errors.hpp"

namespace jca {

std::vector<double> median_filter(std::span<const double> x, std::size_t window) {
    if (window % 2 == 0 || window == 0) {
        throw ConfigError("median_filter: window must be odd, got " +
                          std::to_string(window));
    }
    const std::size_t n = x.size();
    std::vector<double> out(n);
    if (window == 1) {
        std::copy(x.begin(), x.end(), out.begin());
        return out;
    }
    const long half = static_cast<long>(window) / 2;
    std::vector<double> buf(window);
    for (std::size_t i = 0; i < n; ++i) {
        for (long o = -half; o <= half; ++o) {
            long idx = static_cast<long>(i) + o;
            idx = std::clamp<long>(idx, 0, static_cast<long>(n) - 1);
            buf[static_cast<std::size_t>(o + half)] = x[static_cast<std::size_t>(idx)];
        }
        auto mid = buf.begin() + static_cast<long>(window) / 2;
        std::nth_element(buf.begin(), mid, buf.end());
        out[i] = *mid;
    }
    return out;
}

namespace {

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double std_of(std::span<const double> x, double mu) {
    double s = 0.0;
    for (double v : x) s += (v - mu) * (v - mu);
    return std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace

CenterResult center_bias(std::span<const double> pred, std::span<const double> gt) {
    if (pred.empty() || gt.empty()) throw AlignError("center_bias: empty track");
    CenterResult r;
    r.bias = mean_of(gt) - mean_of(pred);
    r.out.resize(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) r.out[i] = pred[i] + r.bias;
    return r;
}

ScaleResult scale_match(std::span<const double> pred, std::span<const double> gt) {
    if (pred.empty() || gt.empty()) throw AlignError("scale_match: empty track");
    ScaleResult r;
    const double mu_p = mean_of(pred);
    const double sd_p = std_of(pred, mu_p);
    const double sd_g = std_of(gt, mean_of(gt));
    if (sd_p == 0.0) {
        r.degenerate = true;
        r.scale = 1.0;
    } else {
        r.scale = sd_g / sd_p;
    }
    r.out.resize(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        r.out[i] = mu_p + (pred[i] - mu_p) * r.scale;
    return r;
}

std::pair<std::vector<double>, std::vector<double>> time_shift(
    std::span<const double> pred, std::span<const double> gt, std::size_t shift) {
    if (pred.size() != gt.size()) {
        throw AlignError("time_shift: lengths differ: " + std::to_string(pred.size()) +
                         " vs " + std::to_string(gt.size()));
    }
    if (shift >= pred.size()) {
        throw ConfigError("time_shift: shift " + std::to_string(shift) +
                          " >= track length " + std::to_string(pred.size()));
    }
    const std::size_t n = pred.size() - shift;
    return {std::vector<double>(pred.begin(), pred.begin() + static_cast<long>(n)),
            std::vector<double>(gt.begin() + static_cast<long>(shift), gt.end())};
}

std::vector<double> apply_chain(const PostprocChain& chain,
                                std::span<const double> pred) {
    std::vector<double> out = median_filter(pred, chain.median_window);
    for (double& v : out) v = chain.scale * v + chain.bias;
    return out;
}

CccReport ccc_after(const PostprocChain& chain, std::span<const double> pred,
                    std::span<const double> gt) {
    std::vector<double> processed = apply_chain(chain, pred);
    auto [p, t] = time_shift(processed, gt, chain.shift);
    return ccc(p, t);
}

GridSearchResult grid_search_postproc(std::span<const double> pred,
                                      std::span<const double> gt,
                                      std::span<const std::size_t> windows,
                                      std::span<const std::size_t> shifts) {
    if (windows.empty() || shifts.empty()) {
        throw ConfigError("grid_search_postproc: empty grid");
    }
    std::vector<std::size_t> ws(windows.begin(), windows.end());
    std::vector<std::size_t> ss(shifts.begin(), shifts.end());
    std::sort(ws.begin(), ws.end());
    std::sort(ss.begin(), ss.end());

    GridSearchResult best;
    for (std::size_t w : ws) {
        const std::vector<double> filtered = median_filter(pred, w);
        const CenterResult centered = center_bias(filtered, gt);
        const ScaleResult scaled = scale_match(centered.out, gt);
        // Folded affine: scale*(x + bias) about the centered mean equals
        // slope*x + intercept with the values below.
        const double slope = scaled.scale;
        const double mu_c = mean_of(centered.out);
        const double intercept = slope * centered.bias + (1.0 - slope) * mu_c;
        for (std::size_t s : ss) {
            auto [p, t] = time_shift(scaled.out, gt, s);
            const CccReport r = ccc(p, t);
            const double score = r.degenerate ? 0.0 : r.rho_c;
            if (score > best.fit_ccc) {
                best.fit_ccc = score;
                best.chain = PostprocChain{w, intercept, slope, s};
            }
        }
    }
    return best;
}

void save_chain(const std::filesystem::path& path, const PostprocChain& chain) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    char buf[64];
    os << "median_window=" << chain.median_window << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", chain.bias);
    os << "bias=" << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", chain.scale);
    os << "scale=" << buf << "\n";
    os << "shift=" << chain.shift << "\n";
}

PostprocChain load_chain(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    PostprocChain chain;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "median_window") chain.median_window = std::stoul(val);
        else if (key == "bias") chain.bias = std::stod(val);
        else if (key == "scale") chain.scale = std::stod(val);
        else if (key == "shift") chain.shift = std::stoul(val);
        else throw FormatError(path.string() + ": unknown key " + key);
    }
    if (chain.median_window % 2 == 0) {
        throw FormatError(path.string() + ": even median window");
    }
    return chain;
}

}  // namespace jca
