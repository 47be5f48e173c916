#pragma once

// Inner-loop arithmetic kernels.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2+FMA
// variant compiled with a per-function target attribute. The active table is
// picked once at first use from CPUID; NEURODYN_KERNELS=scalar forces the
// reference path. Both paths are kept numerically equivalent up to summation
// order and checked against each other in tests/test_kernels.cpp.

#include <cstddef>
#include <span>
#include <string_view>

namespace neurodyn::kernels {

struct KernelTable {
    std::string_view name;
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y = A x with A row-major rows x cols
    void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
};

const KernelTable& scalar_table();

// Null when the build target has no AVX2 variant.
const KernelTable* avx2_table();

// True when the running CPU reports AVX2 and FMA.
bool cpu_has_avx2();

// Active table; resolved once and stable for the life of the process.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<double> y) {
    active().gemv(a.data(), rows, cols, x.data(), y.data());
}

}  // namespace neurodyn::kernels
