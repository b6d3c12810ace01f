#include "ehcap/policy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ehcap/errors.hpp"

namespace ehcap {
namespace {

SymbolDecision truncate_to(double xp, double cap) {
    SymbolDecision d;
    d.x = std::abs(xp) > cap ? std::copysign(cap, xp) : xp;
    d.t = d.x * d.x;
    d.truncated = std::abs(d.x) < std::abs(xp);
    return d;
}

bool is_symmetric_pair(const InputDistribution& law) {
    return law.zero_atom == 0.0 && !law.density && law.mass_points.size() == 2 &&
           std::abs(law.mass_points[0].amplitude + law.mass_points[1].amplitude) <= 1e-12 &&
           std::abs(law.mass_points[0].prob - 0.5) <= 1e-12;
}

SymbolDecision sleep_wake_symbol(const SleepWake& sw, double e_avail, CounterRng& rng) {
    if (sw.p >= 1.0) return {0.0, 0.0, true, false};
    if (sw.p > 0.0 && rng.uniform() < sw.p) return {0.0, 0.0, true, false};

    const double z = sw.z_model.draw(rng);
    if (e_avail < z) return {0.0, 0.0, true, false}; // not enough even to stay awake

    const double cap = std::sqrt(e_avail - z);
    const double xp = std::holds_alternative<GaussianOn>(sw.on)
                          ? rng.normal() * std::sqrt(std::get<GaussianOn>(sw.on).variance)
                          : sample_input(std::get<InputDistribution>(sw.on), rng);
    SymbolDecision d = truncate_to(xp, cap);
    d.t = d.x != 0.0 ? d.x * d.x + z : 0.0;
    return d;
}

SymbolDecision harvest_use_symbol(const HarvestUse& hu, double e_avail, double y_slot,
                                  CounterRng& rng) {
    const InputDistribution* law = nullptr;
    for (const auto& [y, l] : hu.laws)
        if (std::abs(y - y_slot) <= 1e-12) {
            law = &l;
            break;
        }
    if (!law)
        throw MissingDistributionError("harvest-use policy: no input law for y = " +
                                       std::to_string(y_slot));
    const double xp = is_symmetric_pair(*law) ? rng.sign() * std::abs(law->mass_points[0].amplitude)
                                              : sample_input(*law, rng);
    return truncate_to(xp, std::sqrt(std::min(y_slot, e_avail)));
}

} // namespace

double sample_input(const InputDistribution& dist, CounterRng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    double last = 0.0;
    for (const auto& [amplitude, mass] : dist.atomize()) {
        acc += mass;
        last = amplitude;
        if (u < acc) return amplitude;
    }
    return last;
}

SymbolDecision next_symbol(const Policy& policy, double e_avail, double y_slot, CounterRng& rng) {
    if (!(e_avail >= 0.0)) throw std::invalid_argument("next_symbol: e_avail must be >= 0");
    return std::visit(
        [&](const auto& pol) -> SymbolDecision {
            using T = std::decay_t<decltype(pol)>;
            if constexpr (std::is_same_v<T, TruncatedGaussian> ||
                          std::is_same_v<T, BudgetedGaussian>) {
                const double xp = rng.normal() * std::sqrt(pol.power);
                return truncate_to(xp, std::sqrt(e_avail));
            } else if constexpr (std::is_same_v<T, SleepWake>) {
                return sleep_wake_symbol(pol, e_avail, rng);
            } else if constexpr (std::is_same_v<T, HarvestUse>) {
                return harvest_use_symbol(pol, e_avail, y_slot, rng);
            } else {
                const double cap2 = std::min(y_slot, e_avail);
                SymbolDecision d;
                d.x = rng.sign() * std::sqrt(cap2);
                d.t = d.x * d.x;
                d.truncated = e_avail < y_slot;
                return d;
            }
        },
        policy);
}

double budget(BudgetFamily family, const BudgetInputs& in, double eps_rel) {
    double raw = 0.0;
    switch (family) {
        case BudgetFamily::ideal: raw = in.ey; break;
        case BudgetFamily::processing: raw = in.ey - in.ez; break;
        case BudgetFamily::hsu: raw = in.beta1 * in.ey - in.beta2; break;
        case BudgetFamily::hus: raw = in.c; break;
    }
    return raw <= 0.0 ? 0.0 : raw * (1.0 - eps_rel);
}

} // namespace ehcap
