#ifndef EHCAP_EXEC_HPP
#define EHCAP_EXEC_HPP

#include <cstdint>
#include <utility>

namespace ehcap {

// Execution mode for the data-parallel kernels. Serial and parallel paths
// produce bit-identical results: loop bodies only write their own slot and
// every reduction over kernel output is done afterwards in index order.
enum class Exec { serial, parallel };

Exec default_exec() noexcept;
void set_default_exec(Exec mode) noexcept;

namespace detail {
void run_indexed(std::int64_t n, Exec mode, void (*body)(void*, std::int64_t), void* ctx);
}

template <class F>
void parallel_for(std::int64_t n, Exec mode, F&& body) {
    F fn = std::forward<F>(body);
    detail::run_indexed(n, mode, [](void* ctx, std::int64_t i) { (*static_cast<F*>(ctx))(i); }, &fn);
}

} // namespace ehcap

#endif
