#include "voiplan/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace voiplan::kern {

bool cpu_supports_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const Ops& resolve() {
    const char* env = std::getenv("VOIPLAN_KERNELS");
    const std::string choice = env ? env : "auto";
    if (choice == "scalar") return scalar_ops();
    if (choice == "avx2") {
        const Ops* v = avx2_ops();
        if (v == nullptr || !cpu_supports_avx2())
            throw std::runtime_error(
                "VOIPLAN_KERNELS=avx2 requested but the AVX2 variant is unavailable "
                "on this build/CPU");
        return *v;
    }
    if (choice != "auto")
        throw std::runtime_error("VOIPLAN_KERNELS must be scalar, avx2, or auto (got '" +
                                 choice + "')");
    const Ops* v = avx2_ops();
    if (v != nullptr && cpu_supports_avx2()) return *v;
    return scalar_ops();
}

}  // namespace

const Ops& active() {
    static const Ops& selected = resolve();
    return selected;
}

}  // namespace voiplan::kern
