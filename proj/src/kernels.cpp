#include "jca/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace jca::kernels {
namespace {

const Kernels* pick() {
    const char* want = std::getenv("JCA_KERNELS");
    if (want != nullptr) {
        if (std::strcmp(want, "scalar") == 0) return &scalar();
#if defined(__x86_64__) || defined(_M_X64)
        if (std::strcmp(want, "avx2") == 0 && avx2_supported()) return &avx2();
#endif
#if defined(__ARM_NEON) || defined(__aarch64__)
        if (std::strcmp(want, "neon") == 0) return &neon();
#endif
        // Unknown or unavailable request falls back to the reference.
        return &scalar();
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) return &avx2();
#endif
#if defined(__ARM_NEON) || defined(__aarch64__)
    return &neon();
#endif
    return &scalar();
}

}  // namespace

const Kernels& active() {
    static const Kernels* chosen = pick();
    return *chosen;
}

std::vector<const Kernels*> available() {
    std::vector<const Kernels*> out{&scalar()};
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) out.push_back(&avx2());
#endif
#if defined(__ARM_NEON) || defined(__aarch64__)
    out.push_back(&neon());
#endif
    return out;
}

}  // namespace jca::kernels
