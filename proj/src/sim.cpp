#include "ehcap/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ehcap/distribution.hpp"
#include "ehcap/mutual_info.hpp"

namespace ehcap {

SimTrace run(const HarvestModel& model, const BufferConfig& cfg, const Policy& policy,
             const AwgnChannel& ch, std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sim::run: n must be >= 1");
    cfg.validate();
    ch.validate();

    const std::uint64_t harvest_seed = CounterRng::derive(seed, 0);
    const std::uint64_t policy_seed = CounterRng::derive(seed, 1);
    const std::uint64_t noise_seed = CounterRng::derive(seed, 2);
    const double sigma = ch.sigma();

    SimTrace tr;
    const auto nn = static_cast<std::size_t>(n);
    tr.e.reserve(nn);
    tr.y.reserve(nn);
    tr.t.reserve(nn);
    tr.x.reserve(nn);
    tr.w.reserve(nn);
    tr.avail.reserve(nn);
    tr.slept.reserve(nn);
    tr.truncated.reserve(nn);

    BufferState state; // starts empty
    for (std::int64_t k = 0; k < n; ++k) {
        const double y = model.sample_at(harvest_seed, static_cast<std::uint64_t>(k));
        const double avail = available_energy(cfg, state, y);

        CounterRng prng(policy_seed, 8 * static_cast<std::uint64_t>(k));
        const SymbolDecision dec = next_symbol(policy, avail, y, prng);

        CounterRng nrng(noise_seed, 2 * static_cast<std::uint64_t>(k));
        const double w = dec.x + sigma * nrng.normal();

        tr.e.push_back(state.energy);
        tr.y.push_back(y);
        tr.t.push_back(dec.t);
        tr.x.push_back(dec.x);
        tr.w.push_back(w);
        tr.avail.push_back(avail);
        tr.slept.push_back(dec.slept ? 1 : 0);
        tr.truncated.push_back(dec.truncated ? 1 : 0);

        state = step(cfg, state, dec.t, y); // throws on an overdraw
    }
    return tr;
}

SimReport report(const SimTrace& trace, const AwgnChannel& ch, int bins, double mi_tol,
                 Exec mode) {
    if (trace.size() == 0) throw std::invalid_argument("sim::report: empty trace");
    if (bins < 1) throw std::invalid_argument("sim::report: bins must be >= 1");
    ch.validate();

    const std::size_t n = trace.size();
    const std::size_t start = n / 2;
    const std::size_t m = n - start;

    SimReport rep;
    for (std::size_t k = 0; k < n; ++k)
        if (trace.t[k] > trace.avail[k] + kFeasibilityTol) rep.feasible = false;

    double sum_t = 0.0, trunc = 0.0;
    for (std::size_t k = start; k < n; ++k) {
        sum_t += trace.t[k];
        trunc += trace.truncated[k];
    }
    rep.mean_t = sum_t / static_cast<double>(m);
    rep.truncation_rate = trunc / static_cast<double>(m);

    if (m >= 2) {
        // least-squares slope of e against the slot index
        double kbar = 0.0, ebar = 0.0;
        for (std::size_t k = start; k < n; ++k) {
            kbar += static_cast<double>(k);
            ebar += trace.e[k];
        }
        kbar /= static_cast<double>(m);
        ebar /= static_cast<double>(m);
        double num = 0.0, den = 0.0;
        for (std::size_t k = start; k < n; ++k) {
            const double dk = static_cast<double>(k) - kbar;
            num += dk * (trace.e[k] - ebar);
            den += dk * dk;
        }
        rep.drift = den > 0.0 ? num / den : 0.0;
    }

    // histogram the window's inputs; exact zeros count as the sleep atom
    double zero_mass = 0.0;
    double lo = 0.0, hi = 0.0;
    bool seen = false;
    for (std::size_t k = start; k < n; ++k) {
        const double v = trace.x[k];
        if (v == 0.0) {
            zero_mass += 1.0;
            continue;
        }
        if (!seen) {
            lo = hi = v;
            seen = true;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }

    InputDistribution hist;
    hist.zero_atom = zero_mass / static_cast<double>(m);
    if (seen) {
        if (hi - lo <= 0.0) {
            hist.mass_points.push_back({lo, 1.0 - hist.zero_atom});
        } else {
            const double width = (hi - lo) / static_cast<double>(bins);
            std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
            for (std::size_t k = start; k < n; ++k) {
                const double v = trace.x[k];
                if (v == 0.0) continue;
                auto b = static_cast<std::int64_t>((v - lo) / width);
                b = std::clamp<std::int64_t>(b, 0, bins - 1);
                counts[static_cast<std::size_t>(b)] += 1.0;
            }
            for (int b = 0; b < bins; ++b) {
                if (counts[static_cast<std::size_t>(b)] == 0.0) continue;
                const double centre = lo + (static_cast<double>(b) + 0.5) * width;
                hist.mass_points.push_back(
                    {centre, counts[static_cast<std::size_t>(b)] / static_cast<double>(m)});
            }
        }
    }
    rep.empirical_rate = hist.empty() ? 0.0 : mutual_information(hist, ch, mi_tol, mode);
    return rep;
}

} // namespace ehcap
