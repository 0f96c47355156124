#include "pcgseg/kernels.hpp"

namespace pcgseg::kern {

const Kernels* avx2_impl_(); // defined in kernels_avx2.cpp

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Kernels* avx2_or_null() {
    return avx2_available() ? avx2_impl_() : nullptr;
}

const Kernels& active() {
    static const Kernels* chosen = [] {
        if (const Kernels* v = avx2_or_null()) return v;
        return &scalar();
    }();
    return *chosen;
}

} // namespace pcgseg::kern
