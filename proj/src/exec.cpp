#include "ehcap/exec.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ehcap {

namespace {
#ifdef _OPENMP
Exec g_default = Exec::parallel;
#else
Exec g_default = Exec::serial;
#endif
} // namespace

Exec default_exec() noexcept { return g_default; }
void set_default_exec(Exec mode) noexcept { g_default = mode; }

namespace detail {

void run_indexed(std::int64_t n, Exec mode, void (*body)(void*, std::int64_t), void* ctx) {
#ifdef _OPENMP
    if (mode == Exec::parallel && n > 256 && !omp_in_parallel()) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) body(ctx, i);
        return;
    }
#endif
    (void)mode;
    for (std::int64_t i = 0; i < n; ++i) body(ctx, i);
}

} // namespace detail
} // namespace ehcap
