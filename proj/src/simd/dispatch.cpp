#include "pgds/simd.hpp"

#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"

namespace pgds::simd {

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar", detail::dot_f32_scalar, detail::dot_f64_scalar,
                                   detail::axpy_f64_scalar};
    return table;
}

const KernelTable* avx2_kernels() {
#if defined(PGDS_HAVE_AVX2_TU)
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    static const KernelTable table{"avx2", detail::dot_f32_avx2, detail::dot_f64_avx2,
                                   detail::axpy_f64_avx2};
    return supported ? &table : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() {
    static const KernelTable& chosen = []() -> const KernelTable& {
        const char* forced = std::getenv("PGDS_SIMD");
        if (forced != nullptr && std::string(forced) == "scalar") return scalar_kernels();
        if (const KernelTable* avx = avx2_kernels()) return *avx;
        return scalar_kernels();
    }();
    return chosen;
}

}  // namespace pgds::simd
