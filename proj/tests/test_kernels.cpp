#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "neurodyn/kernels.hpp"

using namespace neurodyn;

namespace {

std::vector<double> random_values(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

// Bound on reassociation error for a length-n dot product.
double dot_tol(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * b[i]);
    return 4.0 * static_cast<double>(a.size() + 1) * 1.2e-16 * s + 1e-300;
}

}  // namespace

TEST_CASE("active table is one of the known variants") {
    const auto& t = kernels::active();
    CHECK((t.name == "scalar" || t.name == "avx2"));
    if (t.name == "avx2") CHECK(kernels::cpu_has_avx2());
}

TEST_CASE("scalar reference kernels") {
    const auto& s = kernels::scalar_table();
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{4, -5, 6};
    CHECK(s.dot(a.data(), b.data(), 3) == 12.0);
    std::vector<double> y{1, 1, 1};
    s.axpy(2.0, a.data(), y.data(), 3);
    CHECK(y == std::vector<double>{3, 5, 7});
    const std::vector<double> m{1, 0, 0, 0, 2, 0};
    std::vector<double> out(2);
    s.gemv(m.data(), 2, 3, a.data(), out.data());
    CHECK(out == std::vector<double>{1, 4});
}

TEST_CASE("avx2 variant matches the scalar reference") {
    const kernels::KernelTable* v = kernels::avx2_table();
    if (v == nullptr || !kernels::cpu_has_avx2()) {
        MESSAGE("AVX2 not available; equivalence test skipped");
        return;
    }
    const auto& s = kernels::scalar_table();
    std::mt19937_64 rng(7);
    // Every length from empty through several full 8-wide blocks plus tails.
    for (std::size_t n = 0; n <= 67; ++n) {
        const auto a = random_values(n, rng);
        const auto b = random_values(n, rng);
        CHECK(std::abs(v->dot(a.data(), b.data(), n) - s.dot(a.data(), b.data(), n)) <= dot_tol(a, b));

        auto y1 = random_values(n, rng);
        auto y2 = y1;
        s.axpy(-0.75, a.data(), y1.data(), n);
        v->axpy(-0.75, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15 * (1.0 + std::abs(y1[i])));
    }
    for (std::size_t rows : {1u, 3u, 6u, 13u})
        for (std::size_t cols : {1u, 3u, 4u, 9u, 33u}) {
            const auto m = random_values(rows * cols, rng);
            const auto x = random_values(cols, rng);
            std::vector<double> r1(rows), r2(rows);
            s.gemv(m.data(), rows, cols, x.data(), r1.data());
            v->gemv(m.data(), rows, cols, x.data(), r2.data());
            for (std::size_t r = 0; r < rows; ++r) {
                const std::vector<double> row(m.begin() + static_cast<long>(r * cols),
                                              m.begin() + static_cast<long>((r + 1) * cols));
                CHECK(std::abs(r1[r] - r2[r]) <= dot_tol(row, x));
            }
        }
}

TEST_CASE("kernels are exact on small integer data regardless of variant") {
    const std::vector<double> a{1, -1, 0, -1, 2, 1, 0, 1, 1};
    const std::vector<double> x{1, 1, 1};
    std::vector<double> y(3);
    kernels::gemv(a, 3, 3, x, y);
    CHECK(y == std::vector<double>{0, 2, 2});
}
