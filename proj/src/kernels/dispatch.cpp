#include "dmrr/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace dmrr::kernels {

#if !defined(DMRR_HAVE_AVX2)
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif

bool cpu_has_avx2() noexcept {
#if defined(DMRR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool has = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return has;
#else
    return false;
#endif
}

namespace {

Backend initial_backend() noexcept {
    if (const char* env = std::getenv("DMRR_SIMD"); env && std::strcmp(env, "scalar") == 0)
        return Backend::Scalar;
    return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() noexcept {
    static std::atomic<Backend> b{initial_backend()};
    return b;
}

}  // namespace

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

bool set_backend(Backend b) noexcept {
    if (b == Backend::Avx2 && (!cpu_has_avx2() || avx2_table() == nullptr)) return false;
    current().store(b, std::memory_order_relaxed);
    return true;
}

std::string_view backend_name(Backend b) noexcept {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

const KernelTable& table(Backend b) noexcept {
    if (b == Backend::Avx2 && cpu_has_avx2()) {
        if (const KernelTable* t = avx2_table()) return *t;
    }
    return scalar_table();
}

const KernelTable& active() noexcept {
    // set_backend only admits Avx2 when the table exists and the CPU supports it.
    if (active_backend() == Backend::Avx2) return *avx2_table();
    return scalar_table();
}

}  // namespace dmrr::kernels
