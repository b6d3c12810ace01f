#ifndef EHCAP_SIM_HPP
#define EHCAP_SIM_HPP

#include <cstdint>
#include <vector>

#include "ehcap/buffer.hpp"
#include "ehcap/channel.hpp"
#include "ehcap/exec.hpp"
#include "ehcap/harvest.hpp"
#include "ehcap/policy.hpp"

namespace ehcap {

struct SimTrace {
    std::vector<double> e;     // buffer energy at the start of the slot
    std::vector<double> y;     // harvest
    std::vector<double> t;     // energy spent
    std::vector<double> x;     // channel input
    std::vector<double> w;     // channel output
    std::vector<double> avail; // available energy seen by the policy
    std::vector<std::uint8_t> slept;
    std::vector<std::uint8_t> truncated;

    std::size_t size() const { return e.size(); }
};

struct SimReport {
    double mean_t = 0.0;
    double drift = 0.0;           // least-squares slope of e over the second half
    double truncation_rate = 0.0; // fraction of |x| < |x'| slots in the second half
    double empirical_rate = 0.0;  // nats, from the binned input histogram
    bool feasible = true;
};

// Drive (harvest, buffer, policy, channel) forward for n slots. Deterministic
// in seed; harvest, policy and noise use independent counter streams. Throws
// InfeasibleEnergyError if the policy ever overdraws the buffer.
SimTrace run(const HarvestModel& model, const BufferConfig& cfg, const Policy& policy,
             const AwgnChannel& ch, std::int64_t n, std::uint64_t seed);

// Statistics over the second half of the trace. The empirical rate treats
// exact zeros as a sleep atom and bins the remaining inputs into `bins`
// equal-width mass points evaluated through the known channel.
SimReport report(const SimTrace& trace, const AwgnChannel& ch, int bins = 201,
                 double mi_tol = 1e-6, Exec mode = default_exec());

} // namespace ehcap

#endif
