#ifndef EHCAP_RNG_HPP
#define EHCAP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ehcap {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based generator: the value at counter k is a pure function of
// (seed, k), so streams can be split, replayed, and sampled out of order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) noexcept
        : seed_(mix64(seed)), counter_(counter) {}

    // decorrelated child stream
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) noexcept {
        return mix64(mix64(seed) ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    }

    std::uint64_t counter() const noexcept { return counter_; }
    void seek(std::uint64_t counter) noexcept { counter_ = counter; }

    std::uint64_t next_u64() noexcept { return mix64(seed_ + 0xbf58476d1ce4e5b9ULL * ++counter_); }

    // [0, 1)
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // (0, 1]
    double uniform_pos() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // standard normal, Box-Muller; always consumes exactly two counters
    double normal() noexcept {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double sign() noexcept { return (next_u64() & 1) ? 1.0 : -1.0; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

} // namespace ehcap

#endif
