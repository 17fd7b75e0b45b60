#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2+FMA version chosen at runtime from CPUID. The scalar
// table is always reachable for equivalence testing.

#include <cstddef>
#include <span>
#include <string_view>

namespace dmrr::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sq_dist)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the library was built without the AVX2 translation unit.
const KernelTable* avx2_table() noexcept;

/// True when the running CPU reports AVX2 and FMA.
bool cpu_has_avx2() noexcept;

/// Currently active backend. Picked once from CPUID (overridable with the
/// DMRR_SIMD=scalar environment variable) and changeable with set_backend.
Backend active_backend() noexcept;
/// Returns false (and leaves the backend unchanged) if the CPU cannot run it.
bool set_backend(Backend b) noexcept;
std::string_view backend_name(Backend b) noexcept;

/// Table for `b`; falls back to scalar when `b` is unavailable.
const KernelTable& table(Backend b) noexcept;
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    return active().dot(a.data(), b.data(), a.size());
}
inline double sq_dist(std::span<const double> a, std::span<const double> b) noexcept {
    return active().sq_dist(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
    active().axpy(alpha, x.data(), y.data(), x.size());
}
inline double sum(std::span<const double> a) noexcept { return active().sum(a.data(), a.size()); }
inline double max_abs_diff(std::span<const double> a, std::span<const double> b) noexcept {
    return active().max_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace dmrr::kernels
