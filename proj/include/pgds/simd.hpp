#pragma once
// Data-parallel inner loops used by retrieval, the policy MLP and the
// REINFORCE update. Each kernel has a portable scalar reference and an AVX2
// variant; the variant is picked once at runtime from CPU features.
//
// Set PGDS_SIMD=scalar in the environment to force the reference kernels.

#include <cstddef>
#include <string_view>

namespace pgds::simd {

struct KernelTable {
    std::string_view name;
    // sum_i a[i]*b[i] over float inputs, accumulated in double.
    double (*dot_f32)(const float* a, const float* b, std::size_t n);
    double (*dot_f64)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]. Rounds exactly like the scalar loop (no FMA).
    void (*axpy_f64)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the binary was built without the AVX2 translation unit or the
// CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

// The table every other module calls through.
const KernelTable& active();

inline double dot(const float* a, const float* b, std::size_t n) { return active().dot_f32(a, b, n); }
inline double dot(const double* a, const double* b, std::size_t n) { return active().dot_f64(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy_f64(alpha, x, y, n); }

}  // namespace pgds::simd
