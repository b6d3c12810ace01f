#ifndef EHCAP_CAPACITY_HPP
#define EHCAP_CAPACITY_HPP

#include <utility>
#include <vector>

#include "ehcap/channel.hpp"
#include "ehcap/distribution.hpp"
#include "ehcap/exec.hpp"
#include "ehcap/harvest.hpp"
#include "ehcap/mutual_info.hpp"
#include "ehcap/solver.hpp"

namespace ehcap {

// 0.5 ln(1 + P / sigma2), nats
double awgn_capacity(double power, const AwgnChannel& ch);

// Capacity with |X| <= peak and E[X^2] <= avg_power (avg_power may be +inf).
// Constrained Blahut-Arimoto on a symmetric grid, mass points consolidated
// from adjacent grid atoms.
CapacityResult peak_average_capacity(double peak, double avg_power, const AwgnChannel& ch,
                                     const BaOptions& opt = {}, Exec mode = default_exec());

// Harvest-use: per-slot peak and energy both equal to the harvest value.
struct HuTerm {
    double y = 0.0;    // harvest value (quantile atom for continuous models)
    double prob = 0.0; // its probability
    CapacityResult solve;
};
struct HuCapacity {
    double rate = 0.0; // E_Y[I(X(Y);W)]
    std::vector<HuTerm> per_value;
};
HuCapacity hu_capacity(const HarvestModel& model, const AwgnChannel& ch, const BaOptions& opt = {},
                       int chi_atoms = 64, Exec mode = default_exec());

struct PeOptions {
    BaOptions ba;
    // half-width of the amplitude grid; 0 selects 8 sqrt(sigma2 + ey).
    // Sweeps should pass one shared value so points share a discretization.
    double grid_half_width = 0.0;
};

// Capacity with per-use processing energy ez: cost b(x) = x^2 + ez for x != 0,
// b(0) = 0, constraint E[b(X)] <= ey. Without sleep the node always pays ez
// and the problem closes to awgn_capacity(ey - ez).
CapacityResult pe_capacity(double ey, double ez, const AwgnChannel& ch, bool sleep_allowed,
                           const PeOptions& opt = {}, Exec mode = default_exec());

// same problem with the sleep probability pinned (comparison curves)
CapacityResult pe_capacity_fixed_sleep(double ey, double ez, double sleep_p,
                                       const AwgnChannel& ch, const PeOptions& opt = {},
                                       Exec mode = default_exec());

// Fit k1 exp(-k2 a^2) - p/(1-p) N(0,sigma2)(a) to the solver's continuous part
// and report how far the solved density is from that stationarity form.
struct KtDensityReport {
    double max_deviation = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double cost_error = 0.0; // |E[b(X)] - ey|
    int support_points = 0;
};
KtDensityReport kt_density_check(const CapacityResult& result, double ey, double ez,
                                 const AwgnChannel& ch);

// I(X;W) split into the ON-OFF part and the conditional continuous part:
// i_total = i_onoff + (1 - p) i_gaussian_part for X = B G.
struct OnOffSplit {
    double i_total = 0.0;
    double i_onoff = 0.0;
    double i_gaussian_part = 0.0;
};
OnOffSplit onoff_decomposition(const InputDistribution& dist, const AwgnChannel& ch,
                               double tol = 1e-6, Exec mode = default_exec());

// Largest sustainable harvest-use-store budget: the c solving
// beta1 E[(Y-c)^+] = E[(c-Y)^+] + beta2, or 0 when already infeasible at c=0.
double hus_budget(const HarvestModel& model, double beta1, double beta2);

enum class RateFamily { ideal, processing, hsu, hus, finite_buffer };

struct RateParams {
    double ez = 0.0;
    double beta1 = 1.0;
    double beta2 = 0.0;
    double gamma = 0.0; // buffer size for finite_buffer (peak power)
};

// Closed-form achievable-rate table; arguments clamped to 0 when a budget is
// exhausted. finite_buffer runs the peak/average solver at peak sqrt(gamma).
double rate_table(RateFamily family, const HarvestModel& model, const RateParams& params,
                  const AwgnChannel& ch, const BaOptions& opt = {}, Exec mode = default_exec());

} // namespace ehcap

#endif
