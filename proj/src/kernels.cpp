#include "qwell/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace qwell::kern {

#ifdef QWELL_HAVE_SIMD
const Ops& simd_variant_ops();  // defined in kernels_simd.cpp

static bool cpu_supports_variant() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#elif defined(__aarch64__)
    return true;  // NEON is baseline
#else
    return false;
#endif
}
#endif

const Ops* simd_ops_or_null() {
#ifdef QWELL_HAVE_SIMD
    if (cpu_supports_variant()) return &simd_variant_ops();
#endif
    return nullptr;
}

static const Ops* select() {
    const char* env = std::getenv("QWELL_KERNELS");
    if (env && std::strcmp(env, "scalar") == 0) return &scalar_ops();
    if (const Ops* s = simd_ops_or_null()) return s;
    return &scalar_ops();
}

const Ops& active_ops() {
    static const Ops* ops = select();
    return *ops;
}

std::string active_name() { return active_ops().name; }

}
