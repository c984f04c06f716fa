#include "causal/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace causal::kern {

namespace {

bool want_scalar() {
    const char* env = std::getenv("CAUSAL_KERNELS");
    return env != nullptr && std::strcmp(env, "scalar") == 0;
}

const Ops* select() {
#ifdef CAUSAL_HAVE_AVX2_TU
    if (!want_scalar() && __builtin_cpu_supports("avx2") &&
        __builtin_cpu_supports("fma")) {
        return &avx2::kOps;
    }
#endif
    return &scalar::kOps;
}

const Ops* const g_active = select();

}  // namespace

const Ops& ops() { return *g_active; }

const Ops& scalar_ops() { return scalar::kOps; }

bool using_avx2() { return g_active != &scalar::kOps; }

}  // namespace causal::kern
