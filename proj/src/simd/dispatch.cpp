#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_internal.hpp"
#include "spiked/simd/kernels.hpp"

namespace spiked::simd {

namespace {

const KernelTable kScalar{Backend::scalar,        detail::dot_scalar,   detail::axpy_scalar,
                          detail::gemv_scalar,    detail::gemv_t_scalar, detail::rotate_scalar};

#if defined(SPIKED_HAVE_AVX2)
const KernelTable kAvx2{Backend::avx2,        detail::dot_avx2,   detail::axpy_avx2,
                        detail::gemv_avx2,    detail::gemv_t_avx2, detail::rotate_avx2};
#endif

bool cpu_has_avx2() {
#if defined(SPIKED_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* initial_table() {
    const char* env = std::getenv("SPIKED_LAB_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return &kScalar;
    const KernelTable* t = avx2_kernels();
    return t != nullptr ? t : &kScalar;
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> s{initial_table()};
    return s;
}

}  // namespace

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "unknown";
}

const KernelTable& scalar_kernels() { return kScalar; }

const KernelTable* avx2_kernels() {
#if defined(SPIKED_HAVE_AVX2)
    static const bool ok = cpu_has_avx2();
    return ok ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

Backend select(Backend b) {
    const KernelTable* t = &kScalar;
    if (b == Backend::avx2 && avx2_kernels() != nullptr) t = avx2_kernels();
    slot().store(t, std::memory_order_release);
    return t->backend;
}

}  // namespace spiked::simd
