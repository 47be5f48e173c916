#include "neurodyn/kernels.hpp"

#include <cstdlib>
#include <string>

namespace neurodyn::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

const KernelTable kScalar{"scalar", &dot_scalar, &axpy_scalar, &gemv_scalar};

const KernelTable& resolve() {
    if (const char* env = std::getenv("NEURODYN_KERNELS"); env != nullptr && std::string(env) == "scalar")
        return kScalar;
    if (const KernelTable* t = avx2_table(); t != nullptr && cpu_has_avx2()) return *t;
    return kScalar;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(__i386__)) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& active() {
    static const KernelTable& table = resolve();
    return table;
}

}  // namespace neurodyn::kernels
