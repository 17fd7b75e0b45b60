#include <random>
#include <vector>

#include "doctest.h"
#include "dmrr/kernels.hpp"

using namespace dmrr::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g(0.0, 10.0);
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

bool close(double a, double b, double scale) { return std::fabs(a - b) <= 1e-12 * (1.0 + scale); }

}  // namespace

TEST_SUITE("kernels") {
    TEST_CASE("scalar kernels on a hand-checked input") {
        const auto& k = scalar_table();
        const double a[] = {0.0, 0.0, 1.0};
        const double b[] = {3.0, 4.0, 1.0};
        CHECK(k.sq_dist(a, b, 3) == 25.0);
        CHECK(k.dot(a, b, 3) == 1.0);
        CHECK(k.sum(b, 3) == 8.0);
        CHECK(k.max_abs_diff(a, b, 3) == 4.0);
        double y[] = {1.0, 1.0, 1.0};
        k.axpy(2.0, b, y, 3);
        CHECK(y[0] == 7.0);
        CHECK(y[2] == 3.0);
    }

    TEST_CASE("avx2 kernels agree with scalar references on every tail length") {
        const KernelTable* simd = avx2_table();
        if (simd == nullptr || !cpu_has_avx2()) {
            MESSAGE("AVX2 unavailable; equivalence not exercised");
            return;
        }
        const auto& ref = scalar_table();
        std::mt19937_64 rng(11);
        for (std::size_t n = 0; n <= 67; ++n) {
            const auto a = random_vec(rng, n), b = random_vec(rng, n);
            double mag = 0.0;
            for (std::size_t i = 0; i < n; ++i) mag += std::fabs(a[i] * b[i]) + (a[i] - b[i]) * (a[i] - b[i]);
            CHECK(close(simd->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), mag));
            CHECK(close(simd->sq_dist(a.data(), b.data(), n), ref.sq_dist(a.data(), b.data(), n), mag));
            double abs_sum = 0.0;
            for (double x : a) abs_sum += std::fabs(x);
            CHECK(close(simd->sum(a.data(), n), ref.sum(a.data(), n), abs_sum));
            CHECK(simd->max_abs_diff(a.data(), b.data(), n) == ref.max_abs_diff(a.data(), b.data(), n));

            auto y1 = b, y2 = b;
            simd->axpy(-1.7, a.data(), y1.data(), n);
            ref.axpy(-1.7, a.data(), y2.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i], std::fabs(b[i]) + 1.7 * std::fabs(a[i])));
        }
    }

    TEST_CASE("backend switching") {
        const Backend before = active_backend();
        CHECK(set_backend(Backend::Scalar));
        CHECK(active_backend() == Backend::Scalar);
        CHECK(&active() == &scalar_table());
        CHECK(set_backend(Backend::Avx2) == cpu_has_avx2());
        set_backend(before);
        CHECK(backend_name(Backend::Avx2) == "avx2");
    }
}
