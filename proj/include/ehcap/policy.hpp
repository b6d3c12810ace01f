#ifndef EHCAP_POLICY_HPP
#define EHCAP_POLICY_HPP

#include <utility>
#include <variant>
#include <vector>

#include "ehcap/distribution.hpp"
#include "ehcap/harvest.hpp"
#include "ehcap/rng.hpp"

namespace ehcap {

// X = sgn(X') min(sqrt(E_avail), |X'|) with X' ~ N(0, power)
struct TruncatedGaussian {
    double power = 1.0;
};

// same rule with the variance set from an architecture budget
struct BudgetedGaussian {
    double power = 1.0;
};

// exact Gaussian ON law for sleep-wake signaling
struct GaussianOn {
    double variance = 1.0;
};

// Sleep with probability p (forced when E_avail < Z), otherwise draw the ON
// symbol and truncate it to sqrt(E_avail - Z). Energy cost (x^2 + z) 1{x != 0}.
struct SleepWake {
    double p = 0.0;
    std::variant<GaussianOn, InputDistribution> on = GaussianOn{};
    HarvestModel z_model = HarvestModel::constant(0.0);
};

// per-slot draw from a peak-constrained law X(y) configured per harvest value
struct HarvestUse {
    std::vector<std::pair<double, InputDistribution>> laws;
};

// x = +/- sqrt(y) with a uniform sign; matches the chi-square achievability rule
struct SignedSqrtHarvest {};

using Policy =
    std::variant<TruncatedGaussian, BudgetedGaussian, SleepWake, HarvestUse, SignedSqrtHarvest>;

struct SymbolDecision {
    double x = 0.0;
    double t = 0.0;
    bool slept = false;
    bool truncated = false; // |x| < |x'| event
};

// Draw (X_k, T_k) for one slot. Never spends more than e_avail (up to the
// buffer feasibility tolerance). RNG consumption per slot is bounded by eight
// counters, so callers can give each slot its own counter window.
SymbolDecision next_symbol(const Policy& policy, double e_avail, double y_slot, CounterRng& rng);

// inverse-CDF draw over the law's atomized view (one uniform)
double sample_input(const InputDistribution& dist, CounterRng& rng);

enum class BudgetFamily { ideal, processing, hsu, hus };

struct BudgetInputs {
    double ey = 0.0;
    double ez = 0.0;
    double beta1 = 1.0;
    double beta2 = 0.0;
    double c = 0.0; // harvest-use-store budget
};

// admissible signaling variance, backed off by eps_rel (default 0.1%);
// 0 when the underlying budget is exhausted
double budget(BudgetFamily family, const BudgetInputs& in, double eps_rel = 1e-3);

} // namespace ehcap

#endif
