#include "ehcap/buffer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ehcap {
namespace {

double pos(double v) { return v > 0.0 ? v : 0.0; }

} // namespace

BufferConfig BufferConfig::ideal(Architecture a) { return BufferConfig{a, 1.0, 0.0}; }

void BufferConfig::validate() const {
    if (!(beta1 > 0.0) || beta1 > 1.0) throw std::invalid_argument("buffer: beta1 must be in (0,1]");
    if (!(beta2 >= 0.0)) throw std::invalid_argument("buffer: beta2 must be >= 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("buffer: gamma must be > 0");
}

double available_energy(const BufferConfig& cfg, const BufferState& state, double y) {
    switch (cfg.arch) {
        case Architecture::hsu: return state.energy;
        case Architecture::hu: return y;
        case Architecture::hus: return state.energy + y;
    }
    return 0.0;
}

BufferState step(const BufferConfig& cfg, const BufferState& state, double t, double y) {
    const double avail = available_energy(cfg, state, y);
    if (t > avail + kFeasibilityTol)
        throw InfeasibleEnergyError("policy spent " + std::to_string(t) + " with only " +
                                    std::to_string(avail) + " available");

    double next = 0.0;
    switch (cfg.arch) {
        case Architecture::hsu:
            // E' = ((E - t) - beta2)^+ + beta1 * y
            next = pos(state.energy - t - cfg.beta2) + cfg.beta1 * y;
            break;
        case Architecture::hu:
            next = 0.0; // nothing is ever stored
            break;
        case Architecture::hus:
            // fresh harvest is spent first; only the surplus pays the storage loss
            next = pos(pos(state.energy + cfg.beta1 * pos(y - t) - pos(t - y)) - cfg.beta2);
            break;
    }
    return BufferState{std::min(next, cfg.gamma)};
}

} // namespace ehcap
