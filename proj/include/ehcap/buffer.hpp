#ifndef EHCAP_BUFFER_HPP
#define EHCAP_BUFFER_HPP

#include <limits>

#include "ehcap/errors.hpp"

namespace ehcap {

// Energy-buffer architectures:
//   hsu  harvest-store-use: everything stored first, spend from the buffer
//   hu   harvest-use: spend this slot's harvest or lose it, nothing stored
//   hus  harvest-use-store: spend fresh harvest first, store the remainder
enum class Architecture { hsu, hu, hus };

struct BufferConfig {
    Architecture arch = Architecture::hsu;
    double beta1 = 1.0;                                     // storage efficiency, (0, 1]
    double beta2 = 0.0;                                     // leakage per slot, >= 0
    double gamma = std::numeric_limits<double>::infinity(); // buffer capacity, > 0

    static BufferConfig ideal(Architecture a = Architecture::hsu);
    void validate() const; // throws std::invalid_argument
};

struct BufferState {
    double energy = 0.0; // E_k, clipped to [0, gamma]
};

// round-off slack for t = x^2 against the stored energy
inline constexpr double kFeasibilityTol = 1e-12;

// energy a policy may spend this slot, given harvest y
double available_energy(const BufferConfig& cfg, const BufferState& state, double y);

// one-slot buffer recursion; throws InfeasibleEnergyError when t exceeds the
// available energy by more than kFeasibilityTol
BufferState step(const BufferConfig& cfg, const BufferState& state, double t, double y);

} // namespace ehcap

#endif
