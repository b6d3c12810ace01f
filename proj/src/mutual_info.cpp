#include "ehcap/mutual_info.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ehcap/errors.hpp"

namespace ehcap {
namespace {

// -q ln q for the mixture output density at w
double neg_qlogq(const std::vector<std::pair<double, double>>& atoms, double inv_two_s2,
                 double norm, double w) {
    double q = 0.0;
    for (const auto& [x, m] : atoms) {
        const double d = w - x;
        q += m * std::exp(-d * d * inv_two_s2);
    }
    q *= norm;
    return q > 0.0 ? -q * std::log(q) : 0.0;
}

} // namespace

double output_entropy(const std::vector<std::pair<double, double>>& atoms, const AwgnChannel& ch,
                      double tol, Exec mode) {
    ch.validate();
    if (atoms.empty()) return ch.noise_entropy();

    const double sigma = ch.sigma();
    double lo = atoms.front().first, hi = atoms.front().first;
    for (const auto& [x, m] : atoms) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    lo -= 8.0 * sigma;
    hi += 8.0 * sigma;

    const double inv_two_s2 = 0.5 / ch.sigma2;
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * ch.sigma2);
    const auto f = [&](double w) { return neg_qlogq(atoms, inv_two_s2, norm, w); };

    // initial spacing no coarser than sigma/4 so every mixture lobe is resolved
    std::int64_t n = 256;
    while ((hi - lo) / static_cast<double>(n) > 0.25 * sigma) n *= 2;

    double h = (hi - lo) / static_cast<double>(n);
    std::vector<double> vals(static_cast<std::size_t>(n) + 1);
    parallel_for(n + 1, mode,
                 [&](std::int64_t i) { vals[static_cast<std::size_t>(i)] = f(lo + h * static_cast<double>(i)); });
    double trap = 0.5 * (vals.front() + vals.back());
    for (std::int64_t i = 1; i < n; ++i) trap += vals[static_cast<std::size_t>(i)];
    trap *= h;

    constexpr int kMaxRefinements = 14;
    for (int level = 0; level < kMaxRefinements; ++level) {
        std::vector<double> mids(static_cast<std::size_t>(n));
        parallel_for(n, mode, [&](std::int64_t i) {
            mids[static_cast<std::size_t>(i)] = f(lo + h * (static_cast<double>(i) + 0.5));
        });
        double sum = 0.0;
        for (double v : mids) sum += v;
        const double refined = 0.5 * trap + 0.5 * h * sum;
        if (std::abs(refined - trap) < tol) return refined;
        trap = refined;
        n *= 2;
        h *= 0.5;
    }
    throw QuadratureError("output entropy quadrature did not converge");
}

double mutual_information(const InputDistribution& dist, const AwgnChannel& ch, double tol,
                          Exec mode) {
    dist.validate();
    const auto atoms = dist.atomize();
    if (atoms.empty()) return 0.0;
    const double mi = output_entropy(atoms, ch, tol, mode) - ch.noise_entropy();
    return std::max(mi, 0.0);
}

} // namespace ehcap
